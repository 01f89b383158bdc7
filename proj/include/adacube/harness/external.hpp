/**
 * @file external.hpp
 * @brief Integrand served by a child process over a line protocol.
 *
 * Request: the d coordinates printed with 17 significant digits, separated by
 * single spaces, terminated by '\n'. Response: one decimal number and '\n'.
 * Anything else on the response stream is a protocol violation.
 */
#pragma once

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "adacube/error.hpp"
#include "adacube/harness/log.hpp"

extern char** environ;

namespace adacube {

inline std::string format_request(std::span<const double> x) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", x[i]);
    if (i) s += ' ';
    s += buf;
  }
  s += '\n';
  return s;
}

/// Parse a response line (without the newline); throws on anything but a single number.
inline double parse_response(const std::string& line) {
  if (line.empty() || std::isspace(static_cast<unsigned char>(line.front())))
    throw EvaluationError("protocol violation: malformed response '" + line + "'");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(line.c_str(), &end);
  if (end != line.c_str() + line.size() || errno == ERANGE)
    throw EvaluationError("protocol violation: malformed response '" + line + "'");
  return v;
}

struct ExternalOptions {
  double timeout_seconds = 300.0;
  int max_restarts = 3;
};

class ExternalIntegrand {
 public:
  using Options = ExternalOptions;

  explicit ExternalIntegrand(std::vector<std::string> argv, Options opt = {}) : argv_(std::move(argv)), opt_(opt) {
    detail::require(!argv_.empty(), "external_integrand: empty command");
    start();
  }
  ExternalIntegrand(const ExternalIntegrand&) = delete;
  ExternalIntegrand& operator=(const ExternalIntegrand&) = delete;
  ~ExternalIntegrand() { stop(); }

  double operator()(std::span<const double> x) {
    const std::string req = format_request(x);
    if (auto it = cache_.find(req); it != cache_.end()) return it->second;
    for (int attempt = 0;; ++attempt) {
      if (fd_ < 0) start();
      if (auto line = exchange(req)) {
        const double v = parse_response(*line);
        cache_.emplace(req, v);
        return v;
      }
      stop();
      if (attempt >= opt_.max_restarts)
        throw EvaluationError("external integrand crashed " + std::to_string(attempt + 1) + " times", x.empty() ? 0.0 : x[0]);
      ++restarts_;
      log::info("external integrand exited; restarting");
    }
  }

  std::size_t round_trips() const { return round_trips_; }
  std::size_t restarts() const { return restarts_; }

 private:
  void start() {
    int sv[2];
    if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
      throw EvaluationError(std::string("socketpair failed: ") + std::strerror(errno));
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, sv[1], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&fa, sv[1], STDOUT_FILENO);
    std::vector<char*> args;
    for (auto& a : argv_) args.push_back(a.data());
    args.push_back(nullptr);
    const int rc = posix_spawnp(&pid_, args[0], &fa, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&fa);
    close(sv[1]);
    if (rc != 0) {
      close(sv[0]);
      pid_ = -1;
      throw EvaluationError("cannot start external integrand '" + argv_[0] + "': " + std::strerror(rc));
    }
    fd_ = sv[0];
    buf_.clear();
  }

  void stop() {
    if (fd_ >= 0) {
      shutdown(fd_, SHUT_RDWR);
      close(fd_);
      fd_ = -1;
    }
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 100; ++i) {
        if (waitpid(pid_, &status, WNOHANG) == pid_) {
          pid_ = -1;
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      kill(pid_, SIGKILL);
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  // Returns the response line, or nullopt if the process went away.
  std::optional<std::string> exchange(const std::string& req) {
    if (!buf_.empty()) throw EvaluationError("protocol violation: unsolicited output from external integrand");
    std::size_t sent = 0;
    while (sent < req.size()) {
      const ssize_t n = send(fd_, req.data() + sent, req.size() - sent, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        return std::nullopt;
      }
      sent += static_cast<std::size_t>(n);
    }
    ++round_trips_;
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(opt_.timeout_seconds);
    for (;;) {
      if (auto pos = buf_.find('\n'); pos != std::string::npos) {
        std::string line = buf_.substr(0, pos);
        buf_.erase(0, pos + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        kill(pid_, SIGKILL);
        stop();
        throw EvaluationError("external integrand timed out");
      }
      pollfd p{fd_, POLLIN, 0};
      const int pr = poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
      if (pr < 0 && errno == EINTR) continue;
      if (pr <= 0) continue;
      char chunk[4096];
      const ssize_t n = recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return std::nullopt;
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::vector<std::string> argv_;
  Options opt_;
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buf_;
  std::map<std::string, double> cache_;
  std::size_t round_trips_ = 0;
  std::size_t restarts_ = 0;
};

}  // namespace adacube
