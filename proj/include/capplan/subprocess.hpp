#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

namespace capplan {

/// Child process with piped stdin/stdout/stderr (POSIX).
class Subprocess {
 public:
  using Clock = std::chrono::steady_clock;

  /// Throws SolverLaunchError if the executable cannot be started.
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Writes all of `input` then closes stdin, collecting stdout/stderr until
  /// the child closes stdout or the deadline passes. Returns false on timeout.
  bool communicate(std::string_view input, Clock::time_point deadline);

  /// Writes without closing stdin. Returns false on timeout.
  bool write(std::string_view data, Clock::time_point deadline);
  /// Reads whatever stdout has available, waiting until the deadline for at
  /// least one byte. Returns false on timeout or end of stream.
  bool read_some(Clock::time_point deadline);

  void close_stdin();
  void kill();
  /// Waits for exit; returns the exit status or -1 if signalled.
  int wait();

  std::string& out() { return out_; }
  const std::string& err() const { return err_; }
  bool stdout_closed() const { return out_fd_ < 0; }

 private:
  enum class Mode { Write, DrainAll, UntilOutput };
  bool pump(std::string_view* input, Clock::time_point deadline, Mode mode);

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  int err_fd_ = -1;
  std::string out_;
  std::string err_;
  bool reaped_ = false;
  int status_ = 0;
};

}  // namespace capplan
