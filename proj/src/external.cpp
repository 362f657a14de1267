#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "reflect/abstractor.hpp"

namespace reflect {

// Owns one `/bin/sh -c <command>` child with piped stdin/stdout; stderr goes
// to a temporary file so that failures can quote it.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command) {
    ::signal(SIGPIPE, SIG_IGN);
    char tmpl[] = "/tmp/reflect-abs-stderr-XXXXXX";
    const int err_fd = ::mkstemp(tmpl);
    if (err_fd < 0) throw ExternalError("cannot create stderr capture file");
    stderr_path_ = tmpl;
    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) {
      ::close(err_fd);
      throw ExternalError("pipe() failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw ExternalError("fork() failed");
    if (pid_ == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::dup2(err_fd, STDERR_FILENO);
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::close(err_fd);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_fd);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
  }

  ~ChildProcess() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) {
          pid_ = -1;
          break;
        }
        ::usleep(10000);
      }
      if (pid_ > 0) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
      }
    }
    if (!stderr_path_.empty()) ::unlink(stderr_path_.c_str());
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  void write_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw failure(std::string("write to abstractor failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(double timeout_s) {
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw failure("abstractor timed out");
      pollfd pfd{from_child_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw failure("poll() failed");
      }
      if (ready == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw failure("read from abstractor failed");
      }
      if (n == 0) throw failure("abstractor closed its output");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  ExternalError failure(const std::string& what) const {
    std::ifstream err(stderr_path_);
    std::stringstream ss;
    ss << err.rdbuf();
    std::string excerpt = ss.str();
    if (excerpt.size() > 400) excerpt = excerpt.substr(excerpt.size() - 400);
    return ExternalError(excerpt.empty() ? what : what + "; stderr: " + excerpt);
  }

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::string stderr_path_;
};

ExternalAbstractor::ExternalAbstractor(AbstractorSpec spec) : Abstractor(std::move(spec)) {}
ExternalAbstractor::~ExternalAbstractor() = default;

void ExternalAbstractor::ensure_started() {
  if (child_) return;
  auto child = std::make_unique<ChildProcess>(spec_.external_command);
  const std::string hello = child->read_line(spec_.timeout_s);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(hello);
  } catch (const nlohmann::json::parse_error&) {
    throw child->failure("bad handshake: " + hello);
  }
  if (!j.is_object() || j.value("protocol", std::string()) != "reflect-abs/1") {
    throw child->failure("bad handshake: " + hello);
  }
  child_ = std::move(child);
}

std::string ExternalAbstractor::request(const std::string& id,
                                        const std::vector<std::string>& sentences,
                                        std::size_t budget) {
  std::lock_guard<std::mutex> lock(mutex_);
  try {
    ensure_started();
    nlohmann::ordered_json req;
    req["id"] = id;
    req["sentences"] = sentences;
    req["budget"] = budget;
    child_->write_line(req.dump());
    const std::string line = child_->read_line(spec_.timeout_s);
    nlohmann::json resp;
    try {
      resp = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw child_->failure("malformed response: " + line.substr(0, 200));
    }
    if (!resp.is_object()) throw child_->failure("response is not an object");
    if (resp.contains("error")) throw child_->failure("abstractor error: " + resp["error"].dump());
    if (resp.value("id", std::string()) != id) {
      throw child_->failure("response id mismatch (expected '" + id + "')");
    }
    if (!resp.contains("summary") || !resp["summary"].is_string()) {
      throw child_->failure("response lacks a summary");
    }
    return resp["summary"].get<std::string>();
  } catch (const ExternalError&) {
    child_.reset();
    throw;
  }
}

Tokens ExternalAbstractor::summarize(const DocumentCluster& cluster, const IndexSet& selected) {
  std::vector<std::string> payload;
  payload.reserve(selected.size());
  for (std::size_t i : selected) {
    const auto& s = cluster.sentences.at(i);
    payload.push_back(spec_.payload == PayloadMode::Raw ? s.raw : join_tokens(s.tokens));
  }
  std::string id;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    id = cluster.id + "#" + std::to_string(counter_++);
  }
  try {
    Tokens out = tokenize(request(id, payload, spec_.budget), spec_.tokenizer);
    if (out.size() > spec_.budget) out.resize(spec_.budget);
    return out;
  } catch (const ExternalError& e) {
    if (!spec_.fallback_to_concat) throw;
    warn(std::string("external abstractor failed, using concat-truncate: ") + e.what());
    return concat_truncate(cluster, selected, spec_.budget);
  }
}

}  // namespace reflect
