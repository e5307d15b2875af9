#include "humanizer/external_scorer.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include <json.hpp>

#include "humanizer/error.hpp"

namespace humanizer {

struct ExternalScorerModel::Child {
  pid_t pid = -1;
  int to_child = -1;    // write end of the child's stdin
  int from_child = -1;  // read end of the child's stdout
  std::string buffer;   // bytes read but not yet consumed as a line

  ~Child() { shutdown(); }

  void shutdown() {
    if (to_child >= 0) {
      ::close(to_child);
      to_child = -1;
    }
    if (from_child >= 0) {
      ::close(from_child);
      from_child = -1;
    }
    if (pid > 0) {
      // Give the child a moment to exit on stdin EOF, then force it.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid, nullptr, WNOHANG) != 0) {
          pid = -1;
          return;
        }
        ::usleep(10 * 1000);
      }
      ::kill(pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
      pid = -1;
    }
  }
};

ExternalScorerModel::ExternalScorerModel(ExternalScorerOptions options)
    : options_(std::move(options)) {
  require(!options_.command.empty(), "external scorer: empty command");
  require(options_.timeout.count() > 0, "external scorer: timeout must be positive");
}

ExternalScorerModel::~ExternalScorerModel() = default;

void ExternalScorerModel::ensure_spawned() const {
  if (child_) return;
  // Writes to a dead child must fail with EPIPE instead of raising SIGPIPE.
  static const bool sigpipe_ignored = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;
  int in_pipe[2];   // parent -> child
  int out_pipe[2];  // child -> parent
  // Close-on-exec everywhere: a spawned scorer must not inherit the pipe fds
  // of its siblings, or their stdin never reaches EOF. dup2 below clears the
  // flag on the two fds the child actually uses.
  require(::pipe2(in_pipe, O_CLOEXEC) == 0,
          "external scorer: pipe failed: ", std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    fail("external scorer: pipe failed: ", std::strerror(errno));
  }
  const pid_t pid = ::fork();
  require(pid >= 0, "external scorer: fork failed: ", std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", options_.command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  auto child = std::make_unique<Child>();
  child->pid = pid;
  child->to_child = in_pipe[1];
  child->from_child = out_pipe[0];
  child_ = std::move(child);
}

namespace {

void write_all(int fd, const std::string& data, const std::string& command) {
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("external scorer '", command, "': write failed (process exited?): ",
           std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

std::string read_line(int fd, std::string& buffer, std::chrono::milliseconds timeout,
                      const std::string& command) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    const auto nl = buffer.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      return line;
    }
    const auto now = std::chrono::steady_clock::now();
    require(now < deadline, "external scorer '", command, "': timeout after ",
            timeout.count(), " ms waiting for a response line");
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    struct pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()) + 1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      fail("external scorer '", command, "': poll failed: ", std::strerror(errno));
    }
    require(rc > 0, "external scorer '", command, "': timeout after ", timeout.count(),
            " ms waiting for a response line");
    char chunk[4096];
    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("external scorer '", command, "': read failed: ", std::strerror(errno));
    }
    require(n > 0, "external scorer '", command,
            "': process closed stdout before responding");
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace

LogitsMatrix ExternalScorerModel::score(const AntibodySequence& seq) const {
  ensure_spawned();
  nlohmann::json request;
  request["seq"] = seq.to_string();
  std::string line = request.dump();
  line.push_back('\n');
  try {
    write_all(child_->to_child, line, options_.command);
    const std::string response =
        read_line(child_->from_child, child_->buffer, options_.timeout, options_.command);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(response);
    } catch (const nlohmann::json::exception& e) {
      fail("external scorer '", options_.command, "': malformed JSON response: ", e.what());
    }
    require(j.is_object() && j.contains("logits"), "external scorer '", options_.command,
            "': response missing \"logits\"");
    const auto& logits = j.at("logits");
    require(logits.is_array() && logits.size() == seq.length(), "external scorer '",
            options_.command, "': expected ", seq.length(), " logits rows, got ",
            logits.is_array() ? logits.size() : 0);
    LogitsMatrix z;
    z.rows.reserve(seq.length());
    for (const auto& row_json : logits) {
      require(row_json.is_array() && row_json.size() == kAlphabetSize, "external scorer '",
              options_.command, "': expected ", kAlphabetSize, " columns per row, got ",
              row_json.is_array() ? row_json.size() : 0);
      LogitsRow row;
      for (std::size_t i = 0; i < kAlphabetSize; ++i) {
        require(row_json[i].is_number(), "external scorer '", options_.command,
                "': non-numeric logit");
        row[i] = row_json[i].get<double>();
        require(std::isfinite(row[i]), "external scorer '", options_.command,
                "': non-finite logit in response");
      }
      z.rows.push_back(row);
    }
    return z;
  } catch (...) {
    // A failed exchange leaves the stream in an unknown state; drop the child
    // so the next call starts clean.
    child_.reset();
    throw;
  }
}

}  // namespace humanizer
