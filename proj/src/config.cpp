#include "alap/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace alap {

using nlohmann::json;

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad N-function parameter in '" + spec + "'");
    }
    if (used != item.size()) {
      throw std::invalid_argument("bad N-function parameter in '" + spec + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

NFunction parse_nfunction(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("N-function spec needs family:params, got '" + spec + "'");
  }
  const std::string family = spec.substr(0, colon);
  const auto params = parse_numbers(spec.substr(colon + 1), spec);
  if (family == "power") {
    if (params.size() != 1) throw std::invalid_argument("power takes one parameter p");
    return NFunction::power(params[0]);
  }
  if (family == "plog") {
    if (params.size() != 2) throw std::invalid_argument("plog takes parameters p,q");
    return NFunction::plog(params[0], params[1]);
  }
  throw std::invalid_argument("unknown N-function family '" + family + "'");
}

NFunction nfunction_from_json(const json& j) {
  if (j.is_string()) return parse_nfunction(j.get<std::string>());
  if (!j.is_object() || !j.contains("family")) {
    throw std::invalid_argument("N-function object needs a family");
  }
  const auto family = j.at("family").get<std::string>();
  if (family == "power") return NFunction::power(j.at("p").get<double>());
  if (family == "plog") {
    return NFunction::plog(j.at("p").get<double>(), j.at("q").get<double>());
  }
  throw std::invalid_argument("unknown N-function family '" + family + "'");
}

namespace {

std::string nf_spec_string(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  const auto family = j.at("family").get<std::string>();
  std::ostringstream os;
  os.precision(17);
  os << family << ':' << j.at("p").get<double>();
  if (family == "plog") os << ',' << j.at("q").get<double>();
  return os.str();
}

class TomlReader {
 public:
  explicit TomlReader(const std::string& text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        ++pos_;
        if (peek() == '[') fail("arrays of tables are not supported");
        const std::string name = key();
        skip_inline_space();
        expect(']');
        end_of_line();
        if (!root.contains(name)) root[name] = json::object();
        table = &root[name];
        continue;
      }
      const std::string k = key();
      skip_inline_space();
      expect('=');
      skip_inline_space();
      (*table)[k] = value();
      end_of_line();
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    int line = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) line += s_[i] == '\n';
    throw std::invalid_argument("TOML line " + std::to_string(line) + ": " + what);
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void skip_inline_space() {
    while (peek() == ' ' || peek() == '\t') ++pos_;
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') ++pos_;
    }
  }
  void skip_blank_lines() {
    for (;;) {
      skip_inline_space();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        ++pos_;
      } else {
        return;
      }
    }
  }
  void end_of_line() {
    skip_inline_space();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (!at_end() && peek() != '\n') fail("unexpected trailing characters");
    if (!at_end()) ++pos_;
  }
  std::string key() {
    skip_inline_space();
    if (peek() == '"') return string();
    std::string out;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-') {
      out += s_[pos_++];
    }
    if (out.empty()) fail("expected a key");
    return out;
  }
  std::string string() {
    expect('"');
    std::string out;
    while (peek() != '"') {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '\\') {
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail("unsupported escape");
        }
      }
      out += c;
    }
    ++pos_;
    return out;
  }
  json value() {
    const char c = peek();
    if (c == '"') return string();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      for (;;) {
        skip_blank_lines();
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(value());
        skip_blank_lines();
        if (peek() == ',') {
          ++pos_;
        } else if (peek() != ']') {
          fail("expected ',' or ']'");
        }
      }
    }
    if (c == '{') {
      ++pos_;
      json obj = json::object();
      skip_inline_space();
      if (peek() == '}') {
        ++pos_;
        return obj;
      }
      for (;;) {
        const std::string k = key();
        skip_inline_space();
        expect('=');
        skip_inline_space();
        obj[k] = value();
        skip_inline_space();
        if (peek() == ',') {
          ++pos_;
        } else {
          expect('}');
          return obj;
        }
      }
    }
    std::string word;
    while (!at_end() && std::string(" \t\r\n,]}#").find(peek()) == std::string::npos) {
      word += s_[pos_++];
    }
    if (word == "true") return true;
    if (word == "false") return false;
    std::string digits;
    for (char d : word) {
      if (d != '_') digits += d;
    }
    if (digits.empty()) fail("expected a value");
    const bool is_float = digits.find_first_of(".eE") != std::string::npos ||
                          digits == "inf" || digits == "nan";
    try {
      std::size_t used = 0;
      if (is_float) {
        const double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      } else {
        const long long v = std::stoll(digits, &used);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("cannot parse value '" + word + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

json parse_toml(const std::string& text) { return TomlReader(text).parse(); }

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const bool toml = path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
  try {
    return toml ? parse_toml(buf.str()) : json::parse(buf.str());
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
}

void ExperimentConfig::validate() const {
  if (dimension != 2 && dimension != 3) throw std::invalid_argument("dimension must be 2 or 3");
  for (int r : resolutions) {
    if (r < 8) throw std::invalid_argument("resolution must be >= 8");
  }
  for (const auto& s : nfunctions) parse_nfunction(s);
  for (const auto& p : pairs) {
    parse_nfunction(p.A);
    parse_nfunction(p.B);
  }
  forcing.validate();
  if (balls.count < 0 || !(balls.min_radius > 0.0 && balls.min_radius <= balls.max_radius &&
                           balls.max_radius < 0.5)) {
    throw std::invalid_argument("ball sampling needs 0 < min_radius <= max_radius < 1/2");
  }
  for (double d : deltas) {
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (inequality_trials < 1 || kernel_trials < 1 || monotonicity_trials < 1) {
    throw std::invalid_argument("trial counts must be >= 1");
  }
  if (gradient_seeds < 0) throw std::invalid_argument("gradient_seeds must be >= 0");
}

ExperimentConfig default_config(const std::string& command) {
  ExperimentConfig cfg;
  cfg.seeds = {1};
  if (command == "verify-inequalities") {
    cfg.nfunctions = {"power:1.5", "power:2", "power:3", "power:4", "plog:2,1"};
  } else if (command == "solve") {
    cfg.nfunctions = {"power:3"};
    cfg.resolutions = {128};
  } else if (command == "compare-balls") {
    cfg.nfunctions = {"power:2", "power:3"};
    cfg.resolutions = {128};
  } else if (command == "lemma24") {
    cfg.nfunctions = {"power:2"};
    cfg.resolutions = {64, 128};
    cfg.balls.count = 10;
  } else if (command == "theorem11") {
    cfg.pairs = {{"power:2", "power:4"}, {"power:3", "power:4.5"}};
    cfg.resolutions = {64, 128, 256};
    cfg.seeds.clear();
    for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
  } else if (command == "maximal") {
    cfg.nfunctions = {"power:2"};
    cfg.pairs = {{"power:2", "power:4"}};
    cfg.resolutions = {64, 128};
  } else {
    throw std::invalid_argument("unknown command '" + command + "'");
  }
  return cfg;
}

void apply_json(ExperimentConfig& cfg, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config root must be an object");
  try {
    if (j.contains("nfunctions")) {
      cfg.nfunctions.clear();
      for (const auto& e : j.at("nfunctions")) cfg.nfunctions.push_back(nf_spec_string(e));
    }
    if (j.contains("nf")) cfg.nfunctions = {nf_spec_string(j.at("nf"))};
    if (j.contains("pairs")) {
      cfg.pairs.clear();
      for (const auto& e : j.at("pairs")) {
        cfg.pairs.push_back({nf_spec_string(e.at("A")), nf_spec_string(e.at("B"))});
      }
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (g.contains("n")) cfg.dimension = g.at("n").get<int>();
      if (g.contains("resolutions")) cfg.resolutions = g.at("resolutions").get<std::vector<int>>();
      if (g.contains("resolution")) cfg.resolutions = {g.at("resolution").get<int>()};
    }
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("seed")) cfg.seeds = {j.at("seed").get<std::uint64_t>()};
    if (j.contains("forcing")) {
      const auto& f = j.at("forcing");
      if (f.contains("bumps")) cfg.forcing.bumps = f.at("bumps").get<int>();
      if (f.contains("min_width")) cfg.forcing.min_width = f.at("min_width").get<double>();
      if (f.contains("max_width")) cfg.forcing.max_width = f.at("max_width").get<double>();
    }
    if (j.contains("balls")) {
      const auto& b = j.at("balls");
      if (b.contains("count")) cfg.balls.count = b.at("count").get<int>();
      if (b.contains("min_radius")) cfg.balls.min_radius = b.at("min_radius").get<double>();
      if (b.contains("max_radius")) cfg.balls.max_radius = b.at("max_radius").get<double>();
    }
    if (j.contains("delta")) cfg.deltas = {j.at("delta").get<double>()};
    if (j.contains("deltas")) cfg.deltas = j.at("deltas").get<std::vector<double>>();
    if (j.contains("inequality_trials")) cfg.inequality_trials = j.at("inequality_trials").get<int>();
    if (j.contains("inequality_range")) cfg.inequality_range = j.at("inequality_range").get<double>();
    if (j.contains("kernel_trials")) cfg.kernel_trials = j.at("kernel_trials").get<int>();
    if (j.contains("monotonicity_trials")) {
      cfg.monotonicity_trials = j.at("monotonicity_trials").get<int>();
    }
    if (j.contains("gradient_seeds")) cfg.gradient_seeds = j.at("gradient_seeds").get<int>();
    if (j.contains("solver")) cfg.solver = j.at("solver");
    if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

SolverConfig solver_config_for(const ExperimentConfig& cfg, const NFunction& nf) {
  SolverConfig s = default_solver_config(nf);
  const json& j = cfg.solver;
  try {
    if (j.contains("max_iters")) s.max_iters = j.at("max_iters").get<int>();
    if (j.contains("residual_tol")) s.residual_tol = j.at("residual_tol").get<double>();
    if (j.contains("regularization_eps")) {
      s.regularization_eps = j.at("regularization_eps").get<double>();
    }
    if (j.contains("shrink")) s.line_search.shrink = j.at("shrink").get<double>();
    if (j.contains("sufficient_decrease")) {
      s.line_search.sufficient_decrease = j.at("sufficient_decrease").get<double>();
    }
    if (j.contains("max_backtracks")) s.line_search.max_backtracks = j.at("max_backtracks").get<int>();
    if (j.contains("restart_every")) s.restart_every = j.at("restart_every").get<int>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("solver config: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace alap
