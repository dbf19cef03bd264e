#include "capplan/subprocess.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "capplan/error.hpp"

extern char** environ;

namespace capplan {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

int remaining_ms(Subprocess::Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Subprocess::Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1000 * 60 * 60));
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw SolverLaunchError("empty solver command");
  static std::once_flag ignore_sigpipe;
  std::call_once(ignore_sigpipe, [] { std::signal(SIGPIPE, SIG_IGN); });

  int in[2], out[2], err[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw SolverLaunchError(std::strerror(errno));
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw SolverLaunchError(std::strerror(errno));
  }
  if (::pipe2(err, O_CLOEXEC) != 0) {
    for (int fd : {in[0], in[1], out[0], out[1]}) ::close(fd);
    throw SolverLaunchError(std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err[1], STDERR_FILENO);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  int rc = posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in[0]);
  ::close(out[1]);
  ::close(err[1]);
  if (rc != 0) {
    for (int fd : {in[1], out[0], err[0]}) ::close(fd);
    pid_ = -1;
    throw SolverLaunchError("cannot start '" + argv[0] + "': " + std::strerror(rc));
  }
  in_fd_ = in[1];
  out_fd_ = out[0];
  err_fd_ = err[0];
  for (int fd : {in_fd_, out_fd_, err_fd_}) ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
}

Subprocess::~Subprocess() {
  close_fd(in_fd_);
  close_fd(out_fd_);
  close_fd(err_fd_);
  if (pid_ > 0 && !reaped_) {
    kill();
    wait();
  }
}

void Subprocess::close_stdin() { close_fd(in_fd_); }

void Subprocess::kill() {
  if (pid_ > 0 && !reaped_) ::kill(pid_, SIGKILL);
}

int Subprocess::wait() {
  if (pid_ <= 0) return -1;
  if (!reaped_) {
    while (::waitpid(pid_, &status_, 0) < 0 && errno == EINTR) {
    }
    reaped_ = true;
  }
  return WIFEXITED(status_) ? WEXITSTATUS(status_) : -1;
}

bool Subprocess::pump(std::string_view* input, Clock::time_point deadline, Mode mode) {
  const std::size_t out_before = out_.size();
  char buf[8192];
  for (;;) {
    switch (mode) {
      case Mode::Write:
        if (input->empty() || in_fd_ < 0) return true;
        break;
      case Mode::DrainAll:
        if (out_fd_ < 0 && err_fd_ < 0) return true;
        break;
      case Mode::UntilOutput:
        if (out_.size() > out_before) return true;
        if (out_fd_ < 0) return false;
        break;
    }

    pollfd fds[3];
    int n = 0;
    int wi = -1, oi = -1, ei = -1;
    if (mode == Mode::Write) { wi = n; fds[n++] = {in_fd_, POLLOUT, 0}; }
    if (out_fd_ >= 0) { oi = n; fds[n++] = {out_fd_, POLLIN, 0}; }
    if (err_fd_ >= 0) { ei = n; fds[n++] = {err_fd_, POLLIN, 0}; }

    int rc = ::poll(fds, n, remaining_ms(deadline));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw SolverProtocolError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) return false;

    if (wi >= 0 && (fds[wi].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t w = ::write(in_fd_, input->data(), input->size());
      if (w > 0) {
        input->remove_prefix(static_cast<std::size_t>(w));
      } else if (w < 0 && errno != EAGAIN && errno != EINTR) {
        close_fd(in_fd_);  // child stopped reading
      }
    }
    auto drain = [&](int idx, int& fd, std::string& sink) {
      if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
      ssize_t r = ::read(fd, buf, sizeof buf);
      if (r > 0) sink.append(buf, static_cast<std::size_t>(r));
      else if (r == 0 || (errno != EAGAIN && errno != EINTR)) close_fd(fd);
    };
    drain(oi, out_fd_, out_);
    drain(ei, err_fd_, err_);
  }
}

bool Subprocess::communicate(std::string_view input, Clock::time_point deadline) {
  if (!pump(&input, deadline, Mode::Write)) return false;
  close_stdin();
  return pump(nullptr, deadline, Mode::DrainAll);
}

bool Subprocess::write(std::string_view data, Clock::time_point deadline) {
  if (!pump(&data, deadline, Mode::Write)) return false;
  return data.empty();
}

bool Subprocess::read_some(Clock::time_point deadline) { return pump(nullptr, deadline, Mode::UntilOutput); }

}  // namespace capplan
