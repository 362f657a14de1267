// Test double for the external abstractor protocol. The first argument picks
// the behavior: echo, lead, error, slow, crash, bad-handshake, wrong-id,
// garbage, stderr-exit.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

std::string truncate_words(const std::string& text, std::size_t budget) {
  std::istringstream in(text);
  std::string word, out;
  std::size_t n = 0;
  while (n < budget && in >> word) {
    if (!out.empty()) out += ' ';
    out += word;
    ++n;
  }
  return out;
}

void emit(const nlohmann::ordered_json& j) {
  std::cout << j.dump() << '\n' << std::flush;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "echo";
  if (mode == "bad-handshake") {
    std::cout << "{\"protocol\":\"something-else\"}\n" << std::flush;
  } else if (mode == "stderr-exit") {
    std::cerr << "model weights not found\n";
    return 4;
  } else {
    std::cout << "{\"protocol\":\"reflect-abs/1\"}\n" << std::flush;
  }
  std::string line;
  std::size_t served = 0;
  while (std::getline(std::cin, line)) {
    const auto req = nlohmann::json::parse(line);
    const std::string id = req.at("id").get<std::string>();
    const auto sentences = req.at("sentences").get<std::vector<std::string>>();
    const auto budget = req.at("budget").get<std::size_t>();
    nlohmann::ordered_json resp;
    resp["id"] = id;
    if (mode == "echo" || mode == "slow") {
      if (mode == "slow") std::this_thread::sleep_for(std::chrono::seconds(5));
      std::string joined;
      for (const auto& s : sentences) joined += s + " ";
      resp["summary"] = truncate_words(joined, budget);
    } else if (mode == "lead") {
      resp["summary"] = truncate_words(sentences.empty() ? "" : sentences.front(), budget);
    } else if (mode == "error") {
      resp.erase("summary");
      resp["error"] = "model failure";
    } else if (mode == "crash") {
      if (served++ > 0) {
        std::cerr << "segmentation fault (simulated)\n";
        return 1;
      }
      resp["summary"] = truncate_words(sentences.front(), budget);
    } else if (mode == "wrong-id") {
      resp["id"] = id + "-x";
      resp["summary"] = "x";
    } else if (mode == "garbage") {
      std::cout << "not json\n" << std::flush;
      continue;
    }
    emit(resp);
  }
  return 0;
}
