#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fewgen/errors.hpp"

namespace fewgen {

inline constexpr const char* kArtifactVersion = "1.0.0";

// Record of a CLI invocation: the command, every resolved option value, and
// the files read/written. Re-running the recorded command reproduces the
// output files byte for byte.
struct RunManifest {
  std::string command;
  std::string artifact_version = kArtifactVersion;
  std::uint64_t seed = 0;
  // option long-name (no dashes) -> values; multi-value options keep order
  std::vector<std::pair<std::string, std::vector<std::string>>> config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double duration_seconds = 0.0;

  void set(const std::string& key, std::string value) {
    config.emplace_back(key, std::vector<std::string>{std::move(value)});
  }
  void set_list(const std::string& key, std::vector<std::string> values) {
    config.emplace_back(key, std::move(values));
  }

  void save(const std::filesystem::path& path) const {
    nlohmann::ordered_json j;
    j["artifact_version"] = artifact_version;
    j["command"] = command;
    j["seed"] = seed;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, vals] : config) {
      if (vals.size() == 1)
        cfg[k] = vals[0];
      else
        cfg[k] = vals;
    }
    j["config"] = cfg;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["duration_seconds"] = duration_seconds;
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << j.dump(2) << '\n';
    if (!os) throw IoError("short write to " + path.string());
  }

  static RunManifest load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path.string());
    nlohmann::ordered_json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("manifest " + path.string() + ": " + e.what());
    }
    RunManifest m;
    m.artifact_version = j.value("artifact_version", "");
    m.command = j.at("command").get<std::string>();
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("config")) {
      for (const auto& [k, v] : j.at("config").items()) {
        if (v.is_array())
          m.config.emplace_back(k, v.get<std::vector<std::string>>());
        else
          m.config.emplace_back(k, std::vector<std::string>{v.get<std::string>()});
      }
    }
    m.inputs = j.value("inputs", std::vector<std::string>{});
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.duration_seconds = j.value("duration_seconds", 0.0);
    return m;
  }

  // Argument list that reproduces this run: command followed by --key value
  // pairs in recorded order.
  std::vector<std::string> to_args() const {
    std::vector<std::string> args;
    args.push_back(command);
    for (const auto& [k, vals] : config) {
      for (const auto& v : vals) {
        args.push_back("--" + k);
        args.push_back(v);
      }
    }
    return args;
  }
};

}  // namespace fewgen
