#include "pacsnoc/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace pacsnoc::config {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  std::map<std::string, Value> run() {
    std::map<std::string, Value> out;
    std::string table;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (!eof() && peek() == '[') fail("arrays of tables are not supported");
        table = read_key_until(']');
        expect(']');
        end_of_line();
        continue;
      }
      const std::string key = read_key_until('=');
      expect('=');
      skip_spaces();
      Value v = value();
      end_of_line();
      const std::string full = table.empty() ? key : table + "." + key;
      if (!out.emplace(full, std::move(v)).second) fail("duplicate key '" + full + "'");
    }
    return out;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + what);
  }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }
  void skip_comment() {
    if (!eof() && peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }
  void skip_blank_lines() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (!eof() && peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      return;
    }
  }
  void expect(char c) {
    skip_spaces();
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    ++pos_;
    ++line_;
  }

  std::string read_key_until(char stop) {
    skip_spaces();
    std::string key;
    while (!eof() && peek() != stop && peek() != '\n') key.push_back(text_[pos_++]);
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    if (key.empty()) fail("empty key");
    for (char c : key) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
        fail("invalid character in key '" + key + "'");
      }
    }
    return key;
  }

  Value value() {
    if (eof()) fail("missing value");
    const char c = peek();
    if (c == '"') return Value{string()};
    if (c == '[') return Value{array()};
    if (text_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return Value{true};
    }
    if (text_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return Value{false};
    }
    return Value{number()};
  }

  std::string string() {
    ++pos_;
    std::string s;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') return s;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = text_[pos_++];
        switch (e) {
          case 'n': s.push_back('\n'); break;
          case 't': s.push_back('\t'); break;
          case '"': s.push_back('"'); break;
          case '\\': s.push_back('\\'); break;
          default: fail(std::string("unsupported escape \\") + e);
        }
        continue;
      }
      s.push_back(c);
    }
  }

  std::vector<Value> array() {
    ++pos_;
    std::vector<Value> items;
    while (true) {
      skip_blank_lines();
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        ++pos_;
        return items;
      }
      items.push_back(value());
      skip_blank_lines();
      if (eof()) fail("unterminated array");
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  double number() {
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == '-' ||
                      peek() == '+' || peek() == '_')) {
      if (peek() != '_') tok.push_back(peek());
      ++pos_;
    }
    if (tok.empty()) fail("invalid value");
    if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("invalid number '" + tok + "'");
    }
    if (used != tok.size()) fail("invalid number '" + tok + "'");
    return v;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

[[noreturn]] void type_error(const std::string& key, const char* expected) {
  throw ConfigError("config key '" + key + "' must be " + expected);
}

std::vector<sim::Point> to_points(const std::vector<Vec>& rows, const std::string& key) {
  std::vector<sim::Point> out;
  for (const auto& r : rows) {
    if (r.size() != 2) throw ConfigError("config key '" + key + "' expects [x, y] pairs");
    out.push_back({r[0], r[1]});
  }
  return out;
}

}  // namespace

Document Document::parse(const std::string& text) {
  Document d;
  d.values_ = Parser(text).run();
  return d;
}

void Document::set(const std::string& key, const std::string& text) {
  Value v;
  try {
    v = Parser("v = " + text + "\n").run().at("v");
  } catch (const ConfigError&) {
    v = Value{text};
  }
  values_[key] = std::move(v);
}

Document Document::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Value& Document::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  used_.insert(key);
  return it->second;
}

double Document::number(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (!v.is_number()) type_error(key, "a number");
  return std::get<double>(v.data);
}

std::size_t Document::count(const std::string& key, std::size_t fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key, 0.0);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) type_error(key, "a nonnegative integer");
  return static_cast<std::size_t>(v);
}

bool Document::boolean(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (!std::holds_alternative<bool>(v.data)) type_error(key, "true or false");
  return std::get<bool>(v.data);
}

std::string Document::string(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (!v.is_string()) type_error(key, "a string");
  return std::get<std::string>(v.data);
}

Vec Document::numbers(const std::string& key, const Vec& fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (!v.is_array()) type_error(key, "an array of numbers");
  Vec out;
  for (const auto& item : std::get<std::vector<Value>>(v.data)) {
    if (!item.is_number()) type_error(key, "an array of numbers");
    out.push_back(std::get<double>(item.data));
  }
  return out;
}

std::vector<Vec> Document::matrix(const std::string& key, const std::vector<Vec>& fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (!v.is_array()) type_error(key, "an array of arrays");
  std::vector<Vec> out;
  for (const auto& row : std::get<std::vector<Value>>(v.data)) {
    if (!row.is_array()) type_error(key, "an array of arrays");
    Vec r;
    for (const auto& item : std::get<std::vector<Value>>(row.data)) {
      if (!item.is_number()) type_error(key, "an array of arrays of numbers");
      r.push_back(std::get<double>(item.data));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> Document::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (used_.count(k) == 0) out.push_back(k);
  }
  return out;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kEmpirical:
      return "empirical";
    case Method::kGrid:
      return "grid";
    case Method::kSvgd:
      return "svgd";
    case Method::kFlows:
      return "flows";
  }
  return "unknown";
}

double ExperimentConfig::resolved_lambda(std::size_t sample_size_override) const {
  if (lambda) return *lambda;
  return pb::lambda_star(sample_size_override ? sample_size_override : sample_size, delta, cost.bound);
}

ExperimentConfig from_document(const Document& doc) {
  ExperimentConfig cfg;
  cfg.name = doc.string("experiment.name", cfg.name);
  cfg.output_dir = doc.string("experiment.output_dir", cfg.output_dir);
  cfg.seed = doc.count("experiment.seed", 0);

  const std::string plant_kind = doc.string("plant.kind", "lti");
  if (plant_kind == "lti") {
    sim::ScalarLti lti;
    lti.a = doc.number("plant.a", lti.a);
    lti.b = doc.number("plant.b", lti.b);
    lti.xbar = doc.number("plant.xbar", lti.xbar);
    cfg.plant = sim::Plant(lti);
  } else if (plant_kind == "robots") {
    sim::PlanarRobots r;
    r.mass = doc.number("plant.mass", r.mass);
    r.drag_linear = doc.number("plant.drag_linear", r.drag_linear);
    r.drag_quadratic = doc.number("plant.drag_quadratic", r.drag_quadratic);
    r.prestab_gain = doc.number("plant.prestab_gain", r.prestab_gain);
    r.dt = doc.number("plant.dt", r.dt);
    r.safe_distance = doc.number("plant.safe_distance", r.safe_distance);
    r.barrier_offset = doc.number("plant.barrier_offset", r.barrier_offset);
    r.robot_radius = doc.number("plant.robot_radius", r.robot_radius);
    if (doc.has("plant.spawns")) r.spawns = to_points(doc.matrix("plant.spawns", {}), "plant.spawns");
    if (doc.has("plant.targets")) r.targets = to_points(doc.matrix("plant.targets", {}), "plant.targets");
    if (doc.has("plant.obstacles")) {
      r.obstacles.clear();
      for (const auto& o : doc.matrix("plant.obstacles", {})) {
        if (o.size() != 3) throw ConfigError("plant.obstacles expects [x, y, radius] triples");
        r.obstacles.push_back({{o[0], o[1]}, o[2]});
      }
    }
    const std::string anchor = doc.string("plant.imc_anchor", "target");
    if (anchor == "target") {
      r.imc_anchor = sim::ImcAnchor::kTarget;
    } else if (anchor == "nominal") {
      r.imc_anchor = sim::ImcAnchor::kNominal;
    } else {
      throw ConfigError("plant.imc_anchor must be \"target\" or \"nominal\"");
    }
    cfg.plant = sim::Plant(r);
  } else {
    throw ConfigError("plant.kind must be \"lti\" or \"robots\"");
  }

  const bool lti = cfg.plant.is_lti();
  cfg.noise.state_dim = cfg.plant.state_dim();
  const std::string noise_kind = doc.string("noise.kind", lti ? "gaussian" : "initial");
  if (noise_kind == "gaussian") {
    sim::GaussianPerStep g;
    g.mean = doc.number("noise.mean", g.mean);
    g.stddev = doc.number("noise.stddev", g.stddev);
    cfg.noise.kind = g;
  } else if (noise_kind == "initial") {
    sim::InitialOnly g;
    g.stddev = doc.number("noise.stddev", g.stddev);
    cfg.noise.kind = g;
  } else {
    throw ConfigError("noise.kind must be \"gaussian\" or \"initial\"");
  }
  cfg.noise.validate();

  cfg.sample_size = doc.count("data.S", cfg.sample_size);
  cfg.horizon = doc.count("data.T", lti ? 10 : 100);
  cfg.data_seed = doc.count("data.seed", cfg.data_seed);
  cfg.n_test = doc.count("data.n_test", lti ? 10000 : 500);
  cfg.test_seed = doc.count("data.test_seed", cfg.test_seed);
  if (cfg.sample_size == 0) throw ConfigError("data.S must be at least 1");
  if (cfg.n_test == 0) throw ConfigError("data.n_test must be at least 1");

  if (lti) {
    cost::LtiQuadratic q;
    q.q = doc.number("cost.q", q.q);
    q.r = doc.number("cost.r", q.r);
    cfg.cost.variant = q;
  } else {
    auto nav = cost::RobotNav::defaults_for(cfg.plant.robots());
    nav.q_diag = doc.numbers("cost.q_diag", nav.q_diag);
    nav.r_diag = doc.numbers("cost.r_diag", nav.r_diag);
    cfg.cost.variant = nav;
  }
  cfg.cost.bound = doc.number("cost.C", 1.0);
  if (doc.has("cost.gamma") && doc.at("cost.gamma").is_number()) {
    cfg.cost.gamma = doc.number("cost.gamma", 1.0);
    cfg.gamma_auto = false;
  } else {
    const std::string g = doc.string("cost.gamma", "auto");
    if (g != "auto") throw ConfigError("cost.gamma must be a number or \"auto\"");
    cfg.cost.gamma = 1.0;
  }
  cfg.cost.validate();

  const std::string arch = doc.string("controller.arch", lti ? "affine" : "imc_ren");
  if (arch == "affine") {
    cfg.arch = ctrl::AffineArch{};
  } else if (arch == "imc_ren") {
    ctrl::ImcRenArch r;
    r.xi_dim = doc.count("controller.xi_dim", r.xi_dim);
    r.zeta_dim = doc.count("controller.zeta_dim", r.zeta_dim);
    r.epsilon = doc.number("controller.epsilon", r.epsilon);
    r.state_dim = cfg.plant.state_dim();
    r.input_dim = cfg.plant.input_dim();
    cfg.arch = r;
  } else {
    throw ConfigError("controller.arch must be \"affine\" or \"imc_ren\"");
  }
  ctrl::check_compatible(cfg.arch, cfg.plant);
  if (cfg.gamma_auto) cfg.cost.gamma = cost::default_gamma(cfg.plant, cfg.cost, cfg.horizon);

  const std::string prior = doc.string("prior.kind", lti ? "lti_gaussian" : "gaussian");
  if (prior == "lti_gaussian" || prior == "lti_uniform") {
    if (!lti) throw ConfigError("prior.kind " + prior + " requires the lti plant");
    const auto& p = cfg.plant.lti();
    const auto& q = std::get<cost::LtiQuadratic>(cfg.cost.variant);
    double k_center = 0.0;
    if (doc.has("prior.k_center") && doc.at("prior.k_center").is_number()) {
      k_center = doc.number("prior.k_center", 0.0);
    } else {
      if (doc.string("prior.k_center", "lqr") != "lqr") throw ConfigError("prior.k_center must be a number or \"lqr\"");
      k_center = pb::ih_lqr_gain(p.a, p.b, q.q, q.r);
    }
    pb::Product2D pp;
    pp.k = {k_center, doc.number("prior.k_variance", 1.0)};
    if (prior == "lti_gaussian") {
      pp.beta = pb::Gaussian1D{doc.number("prior.beta_mean", 3.0), doc.number("prior.beta_variance", 1.5 * 1.5)};
    } else {
      pp.beta = pb::Uniform1D{doc.number("prior.beta_lo", -0.5 / p.b), doc.number("prior.beta_hi", 0.5 / p.b)};
    }
    cfg.prior = pb::Prior(pp);
  } else if (prior == "gaussian") {
    const double mean = doc.number("prior.mean", 0.0);
    const double var = doc.number("prior.variance", 1.0);
    cfg.prior = pb::Prior(pb::GaussianIso{Vec(ctrl::parameter_count(cfg.arch), mean), var});
  } else {
    throw ConfigError("prior.kind must be \"lti_gaussian\", \"lti_uniform\" or \"gaussian\"");
  }

  const std::string method = doc.string("method.kind", lti ? "grid" : "svgd");
  if (method == "empirical") {
    cfg.method = Method::kEmpirical;
  } else if (method == "grid") {
    cfg.method = Method::kGrid;
    if (!lti) throw ConfigError("method.kind grid requires the lti plant");
  } else if (method == "svgd") {
    cfg.method = Method::kSvgd;
  } else if (method == "flows") {
    cfg.method = Method::kFlows;
  } else {
    throw ConfigError("method.kind must be empirical, grid, svgd or flows");
  }
  cfg.particles = doc.count("method.particles", cfg.particles);
  cfg.flow_layers = doc.count("method.layers", cfg.flow_layers);
  cfg.flow_scale = doc.number("method.scale", cfg.flow_scale);
  cfg.flow_n_mc = doc.count("method.n_mc", cfg.flow_n_mc);
  cfg.flow_steps = doc.count("method.steps", cfg.flow_steps);
  cfg.flow_lr = doc.number("method.flow_lr", cfg.flow_lr);
  cfg.grid_resolution = doc.count("method.grid_resolution", cfg.grid_resolution);
  if (cfg.particles == 0) throw ConfigError("method.particles must be at least 1");
  if (cfg.grid_resolution < 2) throw ConfigError("method.grid_resolution must be at least 2");
  if (!(cfg.flow_scale > 0.0)) throw ConfigError("method.scale must be positive");
  if (!(cfg.flow_lr >= 0.0)) throw ConfigError("method.flow_lr must be >= 0");

  cfg.delta = doc.number("bound.delta", cfg.delta);
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("bound.delta must lie in (0, 1)");
  if (doc.has("bound.lambda") && doc.at("bound.lambda").is_number()) {
    cfg.lambda = doc.number("bound.lambda", 1.0);
    if (!(*cfg.lambda >= 0.0)) throw ConfigError("bound.lambda must be >= 0");
  } else if (doc.string("bound.lambda", "lambda_star") != "lambda_star") {
    throw ConfigError("bound.lambda must be a number or \"lambda_star\"");
  }
  cfg.n_prior = doc.count("bound.n_prior", cfg.n_prior);
  if (doc.has("bound.split_s1")) {
    if (doc.at("bound.split_s1").is_number()) {
      cfg.split_s1 = {doc.count("bound.split_s1", 0)};
    } else {
      for (double v : doc.numbers("bound.split_s1", {})) {
        if (v < 0.0 || v != std::floor(v)) throw ConfigError("bound.split_s1 entries must be nonnegative integers");
        cfg.split_s1.push_back(static_cast<std::size_t>(v));
      }
    }
    for (std::size_t s1 : cfg.split_s1) {
      if (s1 >= cfg.sample_size) throw ConfigError("bound.split_s1 must leave data for stage 2");
    }
  }
  cfg.n_candidates = doc.count("bound.n_candidates", cfg.n_candidates);
  cfg.bootstrap_resamples = doc.count("bound.bootstrap_resamples", cfg.bootstrap_resamples);
  if (cfg.n_prior == 0 || cfg.n_candidates == 0 || cfg.bootstrap_resamples == 0) {
    throw ConfigError("bound.n_prior, n_candidates and bootstrap_resamples must be positive");
  }

  cfg.train.epochs = doc.count("train.epochs", cfg.train.epochs);
  cfg.train.lr = doc.number("train.lr", cfg.train.lr);
  cfg.train.patience = doc.count("train.patience", cfg.train.patience);
  cfg.train.train_fraction = doc.number("train.train_fraction", cfg.train.train_fraction);
  cfg.train.init_std = doc.number("train.init_std", cfg.train.init_std);
  cfg.train.seed = doc.count("train.seed", cfg.seed);
  cfg.adam = doc.boolean("train.adam", cfg.adam);
  if (!(cfg.train.lr >= 0.0)) throw ConfigError("train.lr must be >= 0");
  if (!(cfg.train.train_fraction > 0.0 && cfg.train.train_fraction <= 1.0)) {
    throw ConfigError("train.train_fraction must lie in (0, 1]");
  }
  if (std::holds_alternative<ctrl::AffineArch>(cfg.arch)) cfg.train.project = ctrl::project_affine;

  const auto unused = doc.unused_keys();
  if (!unused.empty()) throw ConfigError("unknown config key '" + unused.front() + "'");
  return cfg;
}

ExperimentConfig load(const std::string& path) { return from_document(Document::load(path)); }

}  // namespace pacsnoc::config
