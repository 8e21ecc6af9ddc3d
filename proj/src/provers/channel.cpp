#include "channel.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "autoform/core/error.hpp"

namespace autoform::provers::detail {

namespace {

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  if (left <= 0) return 0;
  return left > 1000000000 ? 1000000000 : static_cast<int>(left);
}

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

FdChannel::FdChannel(int read_fd, int write_fd, bool is_socket)
    : read_fd_(read_fd), write_fd_(write_fd), is_socket_(is_socket) {
  ignore_sigpipe();
}

FdChannel::~FdChannel() { close(); }

FdChannel::FdChannel(FdChannel&& other) noexcept { *this = std::move(other); }

FdChannel& FdChannel::operator=(FdChannel&& other) noexcept {
  if (this != &other) {
    close();
    read_fd_ = other.read_fd_;
    write_fd_ = other.write_fd_;
    is_socket_ = other.is_socket_;
    buffer_ = std::move(other.buffer_);
    other.read_fd_ = other.write_fd_ = -1;
  }
  return *this;
}

void FdChannel::close() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  read_fd_ = write_fd_ = -1;
}

void FdChannel::write_all(const std::string& data, Clock::time_point deadline) {
  if (write_fd_ < 0) throw ProverCrashed("channel closed");
  std::size_t done = 0;
  while (done < data.size()) {
    pollfd p{write_fd_, POLLOUT, 0};
    int r = ::poll(&p, 1, remaining_ms(deadline));
    if (r < 0 && errno == EINTR) continue;
    if (r == 0) throw ProverTimeout("timed out writing to prover");
    ssize_t n = is_socket_ ? ::send(write_fd_, data.data() + done, data.size() - done, MSG_NOSIGNAL)
                           : ::write(write_fd_, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw ProverCrashed("write to prover failed: " + errno_text());
    }
    done += static_cast<std::size_t>(n);
  }
}

bool FdChannel::fill(Clock::time_point deadline) {
  if (read_fd_ < 0) return false;
  for (;;) {
    pollfd p{read_fd_, POLLIN, 0};
    int r = ::poll(&p, 1, remaining_ms(deadline));
    if (r < 0 && errno == EINTR) continue;
    if (r == 0) throw ProverTimeout("timed out waiting for prover output");
    char buf[8192];
    ssize_t n = ::read(read_fd_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw ProverCrashed("read from prover failed: " + errno_text());
    }
    if (n == 0) return false;
    buffer_.append(buf, static_cast<std::size_t>(n));
    return true;
  }
}

std::optional<std::string> FdChannel::read_line(Clock::time_point deadline) {
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (!fill(deadline)) {
      if (buffer_.empty()) return std::nullopt;
      std::string rest = std::move(buffer_);
      buffer_.clear();
      return rest;
    }
  }
}

std::optional<std::string> FdChannel::read_exact(std::size_t n, Clock::time_point deadline) {
  while (buffer_.size() < n) {
    if (!fill(deadline)) return std::nullopt;
  }
  std::string out = buffer_.substr(0, n);
  buffer_.erase(0, n);
  return out;
}

std::string FdChannel::drain() {
  std::string out = std::move(buffer_);
  buffer_.clear();
  if (read_fd_ < 0) return out;
  for (;;) {
    pollfd p{read_fd_, POLLIN, 0};
    if (::poll(&p, 1, 0) <= 0) break;
    char buf[4096];
    ssize_t n = ::read(read_fd_, buf, sizeof buf);
    if (n <= 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

ChildProcess::ChildProcess(ChildProcess&& other) noexcept { *this = std::move(other); }

ChildProcess& ChildProcess::operator=(ChildProcess&& other) noexcept {
  if (this != &other) {
    terminate();
    pid = other.pid;
    io = std::move(other.io);
    errors = std::move(other.errors);
    other.pid = -1;
  }
  return *this;
}

ChildProcess::~ChildProcess() { terminate(); }

bool ChildProcess::running() {
  if (pid <= 0) return false;
  int status = 0;
  pid_t r = ::waitpid(pid, &status, WNOHANG);
  if (r == pid) {
    pid = -1;
    return false;
  }
  return true;
}

void ChildProcess::terminate() {
  io.close();
  errors.close();
  if (pid > 0) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    pid = -1;
  }
}

ChildProcess spawn(const std::filesystem::path& executable, const std::vector<std::string>& args,
                   const std::filesystem::path& working_dir) {
  ignore_sigpipe();
  int in_pipe[2], out_pipe[2], err_pipe[2], exec_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) || ::pipe2(out_pipe, O_CLOEXEC) || ::pipe2(err_pipe, O_CLOEXEC) ||
      ::pipe2(exec_pipe, O_CLOEXEC)) {
    throw LaunchFailed("cannot create pipes for " + executable.string() + ": " + errno_text());
  }
  std::vector<std::string> argv_store{executable.string()};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::string cwd = working_dir.string();

  pid_t pid = ::fork();
  if (pid < 0) throw LaunchFailed("fork failed for " + executable.string() + ": " + errno_text());
  if (pid == 0) {
    ::dup2(in_pipe[0], 0);
    ::dup2(out_pipe[1], 1);
    ::dup2(err_pipe[1], 2);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1], exec_pipe[0]}) {
      ::close(fd);
    }
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
      int e = errno;
      (void)!::write(exec_pipe[1], &e, sizeof e);
      ::_exit(127);
    }
    ::execv(argv[0], argv.data());
    int e = errno;
    (void)!::write(exec_pipe[1], &e, sizeof e);
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  ::close(exec_pipe[1]);
  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(exec_pipe[0], &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  ::close(exec_pipe[0]);

  ChildProcess child;
  child.pid = pid;
  child.io = FdChannel(out_pipe[0], in_pipe[1], false);
  child.errors = FdChannel(err_pipe[0], -1, false);
  if (n > 0) {
    child.terminate();
    throw LaunchFailed("cannot start " + executable.string() + ": " + std::strerror(child_errno));
  }
  return child;
}

FdChannel connect_tcp(const std::string& host, int port, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string where = host + ":" + std::to_string(port);
  int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) throw LaunchFailed("cannot resolve " + where + ": " + ::gai_strerror(rc));
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC | SOCK_NONBLOCK, ai->ai_protocol);
    if (fd < 0) continue;
    int r = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (r != 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      r = ::poll(&p, 1, static_cast<int>(timeout.count())) == 1 ? 0 : -1;
      int err = 0;
      socklen_t len = sizeof err;
      if (r == 0) ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      if (r != 0) err = ETIMEDOUT;
      if (err != 0) {
        errno = err;
        r = -1;
      }
    }
    if (r == 0) {
      ::freeaddrinfo(res);
      return FdChannel(fd, fd, true);
    }
    last_error = errno_text();
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw LaunchFailed("cannot connect to " + where + ": " + last_error);
}

}  // namespace autoform::provers::detail
