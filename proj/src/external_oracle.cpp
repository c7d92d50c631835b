#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>

#include "gjsscc/classifier.hpp"
#include "gjsscc/error.hpp"

namespace gjsscc {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

ExternalOracle::ExternalOracle(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
  int in_pair[2];
  int out_pair[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0 ||
      ::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, out_pair) != 0) {
    throw OracleError(std::string("cannot create oracle channel: ") + std::strerror(errno));
  }
  pid_ = ::fork();
  if (pid_ < 0) throw OracleError(std::string("cannot fork oracle: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pair[1], STDIN_FILENO);
    ::dup2(out_pair[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid_, pid_);
  ::close(in_pair[1]);
  ::close(out_pair[1]);
  to_child_ = in_pair[0];
  from_child_ = out_pair[0];

  try {
    std::string tmpl = (std::filesystem::temp_directory_path() / "gjsscc-oracle-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw OracleError("cannot create oracle scratch directory");
    scratch_ = tmpl;

    const std::string ready = read_line();
    int classes = 0;
    if (ready.starts_with("READY ")) {
      const char* b = ready.data() + 6;
      const char* e = ready.data() + ready.size();
      const auto [ptr, ec] = std::from_chars(b, e, classes);
      if (ec != std::errc{} || ptr != e) classes = 0;
    }
    if (classes < 1) throw OracleError("oracle handshake failed: expected 'READY <C>', got '" + ready + "'");
    classes_ = classes;
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalOracle::~ExternalOracle() { shutdown(); }

void ExternalOracle::shutdown() noexcept {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ > 0) {
    ::kill(-pid_, SIGTERM);
    ::waitpid(pid_, nullptr, 0);
  }
  if (!scratch_.empty()) {
    std::error_code ec;
    std::filesystem::remove_all(scratch_, ec);
    scratch_.clear();
  }
  pid_ = -1;
}

std::string ExternalOracle::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw OracleError("oracle timed out after " + std::to_string(timeout_.count()) + " ms");
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) throw OracleError(std::string("oracle poll failed: ") + std::strerror(errno));
    if (rc == 0) continue;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw OracleError("oracle process closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalOracle::write_line(const std::string& line) {
  std::size_t off = 0;
  while (off < line.size()) {
    const ssize_t n = ::send(to_child_, line.data() + off, line.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw OracleError(std::string("cannot write to oracle: ") + std::strerror(errno));
    off += static_cast<std::size_t>(n);
  }
}

ClassDistribution ExternalOracle::classify(const Image& img, int target) {
  if (target < 1 || target > classes_) throw DomainError("classify: target class out of range");
  const auto path = std::filesystem::absolute(
      scratch_ / ("img_" + std::to_string(counter_++) + (img.channels() == 1 ? ".pgm" : ".ppm")));
  save_raster(img, path);
  write_line("CLASSIFY " + path.string() + " " + std::to_string(target) + "\n");
  std::string line;
  try {
    line = read_line();
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    throw;
  }
  std::error_code ec;
  std::filesystem::remove(path, ec);
  return parse_oracle_response(line, classes_, target);
}

}  // namespace gjsscc
