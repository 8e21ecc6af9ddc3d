#pragma once

// In-process stand-in for the Isabelle server TCP protocol, enough for the
// client: password check, session_start, use_theories, purge_theories,
// session_stop, cancel. Theory files are read from master_dir and judged by
// substring: "real list" without "HOL.Complex" fails with the undefined type
// error, "SLEEP" never finishes, "sorry" adds a warning.

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace autoform::testing {

class FakeIsabelleServer {
 public:
  explicit FakeIsabelleServer(std::string password) : password_(std::move(password)) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    ::listen(listen_fd_, 8);
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { accept_loop(); });
  }

  ~FakeIsabelleServer() {
    stop_ = true;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    thread_.join();
    for (auto& t : clients_) t.join();
  }

  int port() const { return port_; }
  int use_theories_calls() const { return use_theories_.load(); }

  static constexpr const char* kRejection = "ERROR \"Bad password\"";

 private:
  void accept_loop() {
    while (!stop_) {
      int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) return;
      clients_.emplace_back([this, fd] { serve(fd); });
    }
  }

  static bool read_line(int fd, std::string& buf, std::string& line) {
    for (;;) {
      auto nl = buf.find('\n');
      if (nl != std::string::npos) {
        line = buf.substr(0, nl);
        buf.erase(0, nl + 1);
        return true;
      }
      char tmp[4096];
      ssize_t n = ::recv(fd, tmp, sizeof tmp, 0);
      if (n <= 0) return false;
      buf.append(tmp, static_cast<std::size_t>(n));
    }
  }

  static void send_line(int fd, const std::string& s) {
    std::string out = s + "\n";
    ::send(fd, out.data(), out.size(), MSG_NOSIGNAL);
  }

  // Long message form: byte count line, then the payload.
  static void send_long(int fd, const std::string& s) {
    std::string payload = s + "\n";
    std::string out = std::to_string(payload.size()) + "\n" + payload;
    ::send(fd, out.data(), out.size(), MSG_NOSIGNAL);
  }

  void serve(int fd) {
    using nlohmann::json;
    std::string buf, line;
    if (!read_line(fd, buf, line) || line != password_) {
      send_line(fd, kRejection);
      ::close(fd);
      return;
    }
    send_line(fd, R"(OK {"isabelle_id":"fake","isabelle_name":"Isabelle2024"})");
    int task = 0;
    while (read_line(fd, buf, line)) {
      auto sp = line.find(' ');
      std::string cmd = line.substr(0, sp);
      json arg = sp == std::string::npos ? json::object() : json::parse(line.substr(sp + 1));
      std::string id = "task-" + std::to_string(++task);
      if (cmd == "session_start") {
        send_line(fd, "OK " + json{{"task", id}}.dump());
        send_line(fd, "NOTE " + json{{"task", id}, {"kind", "writeln"}, {"message", "Starting session HOL"}}.dump());
        send_line(fd, "FINISHED " + json{{"task", id}, {"session_id", "sess-1"}, {"tmp_dir", "/tmp"}}.dump());
      } else if (cmd == "use_theories") {
        ++use_theories_;
        send_line(fd, "OK " + json{{"task", id}}.dump());
        std::string name = arg["theories"][0];
        std::ifstream in(arg["master_dir"].get<std::string>() + "/" + name + ".thy");
        std::stringstream ss;
        ss << in.rdbuf();
        std::string code = ss.str();
        if (code.find("SLEEP") != std::string::npos) continue;
        json errors = json::array(), messages = json::array();
        if (!in) {
          errors.push_back({{"kind", "error"}, {"message", "No such file: " + name}});
        } else if (code.find("real list") != std::string::npos && code.find("HOL.Complex") == std::string::npos) {
          errors.push_back({{"kind", "error"},
                            {"message", "Undefined type name: \"real\" Failed to parse type"},
                            {"pos", {{"line", 2}, {"offset", 40}, {"file", name + ".thy"}}}});
        }
        if (code.find("sorry") != std::string::npos) {
          messages.push_back({{"kind", "warning"}, {"message", "Skipping proof"}, {"pos", {{"line", 3}}}});
        }
        messages.push_back({{"kind", "writeln"}, {"message", "theory loaded"}});
        json result{{"task", id},
                    {"ok", errors.empty()},
                    {"errors", errors},
                    {"nodes", json::array({{{"node_name", name + ".thy"}, {"theory_name", "Draft." + name},
                                             {"messages", messages}}})}};
        send_long(fd, "FINISHED " + result.dump(2));
      } else if (cmd == "purge_theories") {
        send_line(fd, "OK " + json{{"purged", arg["theories"]}, {"retained", json::array()}}.dump());
      } else if (cmd == "cancel") {
        send_line(fd, "OK");
      } else if (cmd == "session_stop") {
        send_line(fd, "OK " + json{{"task", id}}.dump());
        send_line(fd, "FINISHED " + json{{"task", id}, {"ok", true}, {"return_code", 0}}.dump());
      } else {
        send_line(fd, "ERROR \"Bad command " + cmd + "\"");
      }
    }
    ::close(fd);
  }

  std::string password_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<int> use_theories_{0};
  std::thread thread_;
  std::vector<std::thread> clients_;
};

}  // namespace autoform::testing
