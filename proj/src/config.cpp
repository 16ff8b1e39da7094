#include "chartparse/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace chartparse {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Shortest text that reads back to the same double.
std::string real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_real(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || end != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int x{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || end != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string objectives_text(const std::vector<DecoderKind>& objectives) {
  if (objectives.empty()) return "default";
  std::string out;
  for (DecoderKind d : objectives) out += (out.empty() ? "" : ",") + to_string(d);
  return out;
}

std::vector<DecoderKind> parse_objectives(const std::string& v) {
  if (v == "default") return {};
  std::vector<DecoderKind> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_decoder_kind(trim(item)));
  return out;
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  try {
    if (apply_model_setting(c.model, key, value)) return;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  TrainConfig& t = c.train;
  try {
    if (key == "explore") t.explore = parse_bool(key, value);
    else if (key == "unk_z") t.unk_z = parse_real(key, value);
    else if (key == "rho") t.rho = parse_real(key, value);
    else if (key == "eps") t.eps = parse_real(key, value);
    else if (key == "epochs") t.epochs = parse_int<int>(key, value);
    else if (key == "seed") t.seed = parse_int<std::uint64_t>(key, value);
    else if (key == "dev_every") t.dev_every = parse_int<int>(key, value);
    else if (key == "dropout") t.dropout = parse_real(key, value);
    else if (key == "objectives") t.objectives = parse_objectives(value);
    else if (key == "train") c.train_path = value;
    else if (key == "dev") c.dev_path = value;
    else if (key == "model_out") c.model_out = value;
    else if (key == "log") c.log_path = value;
    else throw ConfigError("unknown configuration key '" + key + "'");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (key == "unk_z" && t.unk_z < 0.0) throw ConfigError("unk_z must be non-negative");
  if (key == "rho" && !(t.rho > 0.0 && t.rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  if (key == "eps" && !(t.eps > 0.0)) throw ConfigError("eps must be positive");
  if (key == "epochs" && t.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (key == "dropout" && !(t.dropout >= 0.0 && t.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

std::map<std::string, std::string> settings(const RunConfig& c) {
  auto out = model_settings(c.model);
  const TrainConfig& t = c.train;
  out["explore"] = t.explore ? "true" : "false";
  out["unk_z"] = real(t.unk_z);
  out["rho"] = real(t.rho);
  out["eps"] = real(t.eps);
  out["epochs"] = std::to_string(t.epochs);
  out["seed"] = std::to_string(t.seed);
  out["dev_every"] = std::to_string(t.dev_every);
  out["dropout"] = real(t.dropout);
  out["objectives"] = objectives_text(t.objectives);
  out["train"] = c.train_path;
  out["dev"] = c.dev_path;
  out["model_out"] = c.model_out;
  out["log"] = c.log_path;
  return out;
}

bool RunConfig::operator==(const RunConfig& other) const { return settings(*this) == settings(other); }

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig read_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string render_config(const RunConfig& c) {
  std::string out;
  for (const auto& [k, v] : settings(c)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace chartparse
