#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace tbarrier::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

class Parser {
 public:
  Parser(std::string source, RunConfig& cfg) : source_(std::move(source)), cfg_(cfg) { build_schema(); }

  void parse(std::istream& in) {
    std::string line;
    std::string section;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      line = trim(strip_comment(line));
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(lineno, "malformed section header '" + line + "'");
        section = trim(line.substr(1, line.size() - 2));
        if (!sections_.count(section)) fail(lineno, "unknown config section '" + section + "'");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(lineno, "expected key = value, got '" + line + "'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (section.empty()) fail(lineno, "key '" + key + "' outside of a section");
      const std::string qualified = section + "." + key;
      auto it = schema_.find(qualified);
      if (it == schema_.end()) fail(lineno, "unknown config key '" + qualified + "'");
      if (!seen.insert(qualified).second) fail(lineno, "duplicate config key '" + qualified + "'");
      if (value.empty()) fail(lineno, "empty value for '" + qualified + "'");
      try {
        it->second(value);
      } catch (const ConfigError& e) {
        fail(lineno, std::string(e.what()) + " for '" + qualified + "'");
      }
    }
  }

 private:
  static std::string strip_comment(const std::string& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        return line.substr(0, i);
      }
    }
    return line;
  }

  [[noreturn]] void fail(int lineno, const std::string& msg) const {
    std::ostringstream os;
    os << source_ << ":" << lineno << ": " << msg;
    throw ConfigError(os.str());
  }

  static double to_double(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("invalid number '" + s + "'");
    return v;
  }

  template <class Int>
  static Int to_int(const std::string& s) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError("invalid integer '" + s + "'");
    return v;
  }

  static std::vector<double> to_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(to_double(item));
    return out;
  }

  void number(const std::string& key, double& target) {
    schema_[key] = [&target](const std::string& v) { target = to_double(v); };
  }

  void list(const std::string& key, std::vector<double>& target) {
    schema_[key] = [&target](const std::string& v) { target = to_list(v); };
  }

  void build_schema() {
    sections_ = {"params", "policy", "initial", "certify", "witness", "sweep", "output"};
    number("params.tc", cfg_.tc);
    number("params.beta", cfg_.beta);
    number("params.q", cfg_.q);
    number("params.alpha", cfg_.alpha);

    number("policy.eps_conv", cfg_.policy.eps_conv);
    number("policy.rel_tol", cfg_.policy.rel_tol);
    number("policy.abs_tol", cfg_.policy.abs_tol);
    number("policy.sign_eps", cfg_.policy.sign_eps);
    number("policy.residual_tol", cfg_.policy.residual_tol);
    schema_["policy.delta_end"] = [this](const std::string& v) { cfg_.policy.delta_end = to_double(v); };

    list("initial.x0", cfg_.x0);
    number("certify.bias", cfg_.bias);
    number("witness.vlevel", cfg_.vlevel);
    number("witness.t1", cfg_.t1);
    number("witness.t2", cfg_.t2);

    list("sweep.tc", cfg_.sweep.tc);
    list("sweep.beta", cfg_.sweep.beta);
    list("sweep.q", cfg_.sweep.q);
    list("sweep.alpha", cfg_.sweep.alpha);
    schema_["sweep.x0_decade_min"] = [this](const std::string& v) { cfg_.sweep.x0_decade_min = to_int<int>(v); };
    schema_["sweep.x0_decade_max"] = [this](const std::string& v) { cfg_.sweep.x0_decade_max = to_int<int>(v); };
    schema_["sweep.seed"] = [this](const std::string& v) { cfg_.sweep.seed = to_int<std::uint64_t>(v); };
    schema_["sweep.threads"] = [this](const std::string& v) { cfg_.sweep.threads = to_int<unsigned>(v); };
    schema_["sweep.law"] = [this](const std::string& v) {
      const auto law = parse_law(v);
      if (!law) throw ConfigError("unknown law '" + v + "' (expected time_barrier or power_law)");
      cfg_.sweep.law = *law;
    };
    schema_["sweep.checks"] = [this](const std::string& v) {
      CheckSet checks = CheckSet::none();
      if (v == "all") {
        checks = CheckSet{};
      } else if (v != "none") {
        for (const auto& name : split_list(v)) {
          if (name == "deadline") {
            checks.deadline = true;
          } else if (name == "certificate") {
            checks.certificate = true;
          } else if (name == "bound_tightness") {
            checks.bound_tightness = true;
          } else if (name == "oracle_error") {
            checks.oracle_error = true;
          } else {
            throw ConfigError("unknown check '" + name + "'");
          }
        }
      }
      cfg_.sweep.checks = checks;
    };
    schema_["output.path"] = [this](const std::string& v) { cfg_.output = v; };
  }

  std::string source_;
  RunConfig& cfg_;
  std::set<std::string> sections_;
  std::map<std::string, std::function<void(const std::string&)>> schema_;
};

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  Parser(source, cfg).parse(in);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace tbarrier::cli
