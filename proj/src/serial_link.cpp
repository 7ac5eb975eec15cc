#include <fcntl.h>
#include <termios.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "embodied/virtual_device.hpp"

namespace embodied::link {

namespace {

speed_t baud_constant(int baud) {
  switch (baud) {
    case 9600: return B9600;
    case 19200: return B19200;
    case 38400: return B38400;
    case 57600: return B57600;
    case 115200: return B115200;
    case 230400: return B230400;
    default: throw Error("SerialError", "unsupported baud rate " + std::to_string(baud));
  }
}

}  // namespace

SerialLink::SerialLink(const std::string& port, int baud) {
  const speed_t speed = baud_constant(baud);
  fd_ = ::open(port.c_str(), O_RDWR | O_NOCTTY);
  if (fd_ < 0) throw Error("SerialError", "cannot open " + port + ": " + std::strerror(errno));
  termios tty{};
  if (tcgetattr(fd_, &tty) != 0) {
    ::close(fd_);
    throw Error("SerialError", "tcgetattr failed on " + port);
  }
  cfmakeraw(&tty);
  tty.c_cflag &= ~static_cast<tcflag_t>(PARENB | CSTOPB | CSIZE);
  tty.c_cflag |= CS8 | CLOCAL | CREAD;
  cfsetispeed(&tty, speed);
  cfsetospeed(&tty, speed);
  if (tcsetattr(fd_, TCSANOW, &tty) != 0) {
    ::close(fd_);
    throw Error("SerialError", "tcsetattr failed on " + port);
  }
}

SerialLink::~SerialLink() {
  if (fd_ >= 0) ::close(fd_);
}

void SerialLink::send(std::span<const std::uint8_t> bytes) {
  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n = ::write(fd_, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("SerialError", std::string("write failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

}  // namespace embodied::link
