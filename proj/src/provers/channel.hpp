#pragma once

// Deadline-aware byte I/O over file descriptors (pipes and sockets), plus a
// minimal child-process launcher. Private to the provers module.

#include <sys/types.h>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace autoform::provers::detail {

using Clock = std::chrono::steady_clock;

class FdChannel {
 public:
  FdChannel() = default;
  FdChannel(int read_fd, int write_fd, bool is_socket);
  ~FdChannel();
  FdChannel(FdChannel&& other) noexcept;
  FdChannel& operator=(FdChannel&& other) noexcept;

  // Throws ProverTimeout past the deadline and ProverCrashed on a broken pipe.
  void write_all(const std::string& data, Clock::time_point deadline);
  // Line without its terminator; nullopt at end of stream.
  std::optional<std::string> read_line(Clock::time_point deadline);
  // Exactly n bytes; nullopt if the stream ends first.
  std::optional<std::string> read_exact(std::size_t n, Clock::time_point deadline);
  // Whatever is readable right now (non-blocking drain).
  std::string drain();

  void close();
  bool open() const { return read_fd_ >= 0; }

 private:
  bool fill(Clock::time_point deadline);

  int read_fd_ = -1;
  int write_fd_ = -1;
  bool is_socket_ = false;
  std::string buffer_;
};

struct ChildProcess {
  pid_t pid = -1;
  FdChannel io;      // child's stdout (read) and stdin (write)
  FdChannel errors;  // child's stderr (read only)

  ChildProcess() = default;
  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&& other) noexcept;
  ~ChildProcess();

  void terminate();
  bool running();
};

// Throws LaunchFailed naming the executable if it cannot be started.
ChildProcess spawn(const std::filesystem::path& executable, const std::vector<std::string>& args,
                   const std::filesystem::path& working_dir);

// Throws LaunchFailed if the connection cannot be established.
FdChannel connect_tcp(const std::string& host, int port, std::chrono::milliseconds timeout);

}  // namespace autoform::provers::detail
