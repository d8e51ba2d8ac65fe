#include "relsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace relsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& where, const std::string& reason) {
  throw Error(ErrorCode::ConfigError, where + ": " + reason);
}

double parse_number(const std::string& where, const std::string& text) {
  std::string t = trim(text);
  double v = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size())
    fail(where, "'" + text + "' is not a number");
  return v;
}

bool parse_bool(const std::string& where, const std::string& text) {
  std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  fail(where, "'" + text + "' is not a boolean");
}

std::vector<double> parse_vector(const std::string& where, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(where, item));
  return out;
}

// Flat view of the parsed file: ordered (section.key, value) pairs with
// consumption tracking so unknown keys are reported with their path.
class KeyTable {
 public:
  void insert(const std::string& key, const std::string& value) {
    if (values_.count(key)) fail(key, "duplicate key");
    values_[key] = value;
    order_.push_back(key);
  }

  const std::string* get(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& k : order_)
      if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
  }

  void check_all_consumed() const {
    for (const auto& k : order_)
      if (!consumed_.count(k)) fail(k, "unknown key");
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
  std::vector<std::string> order_;
};

KeyTable parse_ini(const std::string& text) {
  KeyTable table;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        fail("line " + std::to_string(line_no), "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        fail("line " + std::to_string(line_no), "empty section name");
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos)
      fail("line " + std::to_string(line_no), "expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail("line " + std::to_string(line_no), "empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (section.empty())
      fail("line " + std::to_string(line_no), "key outside of any [section]");
    table.insert(section + "." + key, value);
  }
  return table;
}

Expr parse_expr_key(const std::string& where, const std::string& text,
                    const std::vector<std::string>& params) {
  try {
    return Expr::parse(text, params);
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

bool valid_param_name(const std::string& name) {
  if (name.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_') return false;
  for (char ch : name)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
  static const char* reserved[] = {"q1", "q2",  "q3",  "q4",   "c",    "pi",
                                   "sin", "cos", "tan", "exp",  "log",  "sqrt",
                                   "sinh", "cosh", "tanh", "abs"};
  for (const char* r : reserved)
    if (name == r) return false;
  return true;
}

}  // namespace

RunConfig load_config_text(const std::string& text, const std::string& origin) {
  KeyTable keys = parse_ini(text);
  RunConfig cfg;
  auto note = [&cfg](const std::string& key, const std::string& value) {
    cfg.echo.emplace_back(key, value);
  };

  // --- [run] ---------------------------------------------------------------
  const std::string* regime_str = keys.get("run.regime");
  if (!regime_str) fail("run.regime", "missing (massive | tachyon | massless | general)");
  if (*regime_str == "massive") cfg.spec.regime = Regime::Massive;
  else if (*regime_str == "tachyon") cfg.spec.regime = Regime::Tachyon;
  else if (*regime_str == "massless") cfg.spec.regime = Regime::Massless;
  else if (*regime_str == "general") cfg.spec.regime = Regime::GeneralMass;
  else fail("run.regime", "unknown regime '" + *regime_str + "'");
  note("run.regime", *regime_str);

  bool needs_m0 =
      cfg.spec.regime == Regime::Massive || cfg.spec.regime == Regime::Tachyon;
  if (const std::string* v = keys.get("run.m0")) {
    if (!needs_m0) fail("run.m0", "rest mass applies to massive/tachyon regimes only");
    cfg.spec.m0 = parse_number("run.m0", *v);
    if (!(cfg.spec.m0 > 0.0)) fail("run.m0", "rest mass must be positive");
  } else if (needs_m0) {
    fail("run.m0", "missing rest mass");
  } else {
    cfg.spec.m0 = 0.0;
  }
  if (needs_m0) note("run.m0", format_double(cfg.spec.m0));

  if (const std::string* v = keys.get("run.c")) {
    cfg.c = parse_number("run.c", *v);
    if (!(cfg.c > 0.0)) fail("run.c", "speed of light must be positive");
  }
  note("run.c", format_double(cfg.c));

  if (const std::string* v = keys.get("run.e"))
    cfg.spec.charge_e = parse_number("run.e", *v);
  note("run.e", format_double(cfg.spec.charge_e));

  bool a_given = keys.has("run.a");
  bool a_from_mass = false;
  if (const std::string* v = keys.get("run.scalar_charge_is_mass"))
    a_from_mass = parse_bool("run.scalar_charge_is_mass", *v);
  if (a_given && a_from_mass)
    fail("run.a", "give either a or scalar_charge_is_mass, not both");
  double scalar_charge;
  if (a_given) {
    scalar_charge = parse_number("run.a", *keys.get("run.a"));
  } else if (a_from_mass) {
    scalar_charge = cfg.spec.m0;  // zero for massless, matching a = m0
  } else {
    scalar_charge = cfg.spec.regime == Regime::Massless ? 0.0 : 1.0;
  }
  cfg.spec.scalar_charge = scalar_charge;
  note("run.a", format_double(scalar_charge));

  if (const std::string* v = keys.get("run.verify"))
    cfg.verify = parse_bool("run.verify", *v);

  // --- [fields] ------------------------------------------------------------
  for (const std::string& key : keys.keys_with_prefix("fields.param.")) {
    std::string name = key.substr(std::string("fields.param.").size());
    if (!valid_param_name(name))
      fail(key, "invalid or reserved parameter name '" + name + "'");
    cfg.fields.param_names.push_back(name);
    cfg.fields.param_values.push_back(parse_number(key, *keys.get(key)));
    note(key, format_double(cfg.fields.param_values.back()));
  }
  const auto& params = cfg.fields.param_names;

  bool any_phi = false, any_av = false;
  static const char* phi_keys[4] = {"fields.phi1", "fields.phi2", "fields.phi3",
                                    "fields.phi4"};
  static const char* av_keys[4] = {"fields.A1", "fields.A2", "fields.A3", "fields.V"};
  for (const char* k : phi_keys) any_phi = any_phi || keys.has(k);
  for (const char* k : av_keys) any_av = any_av || keys.has(k);
  if (any_phi && any_av)
    fail("fields", "give either phi1..phi4 or A1..A3/V, not both");

  if (any_av) {
    double k_a = cfg.spec.charge_e / cfg.c;   // phi_l = (e/c) A_l
    double k_v = -cfg.spec.charge_e / cfg.c;  // phi_4 = -(e/c) V
    for (int l = 0; l < 3; ++l) {
      if (const std::string* v = keys.get(av_keys[l])) {
        cfg.fields.phi[l] = Expr::scaled(k_a, parse_expr_key(av_keys[l], *v, params));
        note(av_keys[l], *v);
      } else {
        cfg.fields.phi[l] = Expr::literal(0.0);
      }
    }
    if (const std::string* v = keys.get("fields.V")) {
      cfg.fields.phi[3] = Expr::scaled(k_v, parse_expr_key("fields.V", *v, params));
      note("fields.V", *v);
    } else {
      cfg.fields.phi[3] = Expr::literal(0.0);
    }
  } else {
    for (int sigma = 0; sigma < 4; ++sigma) {
      if (const std::string* v = keys.get(phi_keys[sigma])) {
        cfg.fields.phi[sigma] = parse_expr_key(phi_keys[sigma], *v, params);
        note(phi_keys[sigma], *v);
      } else {
        cfg.fields.phi[sigma] = Expr::literal(0.0);
      }
    }
  }

  if (const std::string* v = keys.get("fields.psi")) {
    Expr raw = parse_expr_key("fields.psi", *v, params);
    cfg.fields.psi = Expr::scaled(cfg.spec.scalar_charge, raw);
    note("fields.psi", *v);
  } else {
    cfg.fields.psi = Expr::literal(0.0);
  }

  if (cfg.spec.regime == Regime::GeneralMass) {
    const std::string* v = keys.get("fields.M");
    if (!v) fail("fields.M", "the general regime requires a mass-squared expression");
    cfg.fields.mass_sq = parse_expr_key("fields.M", *v, params);
    note("fields.M", *v);
  } else {
    if (keys.has("fields.M"))
      fail("fields.M", "M is fixed by the regime; use regime = general");
    cfg.fields.mass_sq = Expr::literal(cfg.spec.preset_mass_sq());
  }

  if (const std::string* v = keys.get("run.energy")) {
    if (cfg.spec.regime != Regime::Massless)
      fail("run.energy", "the energy function applies to the massless regime only");
    cfg.spec.energy = parse_expr_key("run.energy", *v, params);
    note("run.energy", *v);
  } else if (cfg.spec.regime == Regime::Massless) {
    cfg.spec.energy = Expr::literal(1.0);
    note("run.energy", "1");
  }

  // --- [initial] -----------------------------------------------------------
  bool has_4d = keys.has("initial.q");
  bool has_3d = keys.has("initial.r") || keys.has("initial.v");
  if (has_4d == has_3d)
    fail("initial", "give exactly one of the 4D (q, qdot) or 3D (r, v) forms");

  if (has_4d) {
    if (cfg.spec.regime == Regime::Massless)
      fail("initial.q", "massless initial conditions use the 3D (r, v) form");
    cfg.init_form = RunConfig::InitForm::FourD;
    auto qv = parse_vector("initial.q", *keys.get("initial.q"));
    if (qv.size() != 4) fail("initial.q", "expected 4 components");
    const std::string* qd = keys.get("initial.qdot");
    if (!qd) fail("initial.qdot", "missing");
    auto qdv = parse_vector("initial.qdot", *qd);
    if (qdv.size() != 3 && qdv.size() != 4)
      fail("initial.qdot", "expected 3 spatial components (optional 4th is checked)");
    for (int i = 0; i < 4; ++i) cfg.init4.q[i] = qv[i];
    for (int l = 0; l < 3; ++l) cfg.init4.qdot[l] = qdv[l];
    if (const std::string* v = keys.get("initial.s0"))
      cfg.init4.s = parse_number("initial.s0", *v);

    double h = 0.0;
    try {
      FieldSample s0 = sample(cfg.fields, cfg.init4.q, cfg.c);
      h = constraint_normal_form(s0, cfg.init4.qdot, cfg.c);
    } catch (const Error& e) {
      fail("initial.qdot", e.what());
    }
    if (qdv.size() == 4 && std::fabs(qdv[3] - h) > 1e-10 * std::fmax(1.0, h))
      fail("initial.qdot", "given qdot4 = " + format_double(qdv[3]) +
                               " is inconsistent with the constraint value " +
                               format_double(h));
    note("initial.s0", format_double(cfg.init4.s));
    note("initial.q", *keys.get("initial.q"));
    note("initial.qdot", *qd);
  } else {
    cfg.init_form = RunConfig::InitForm::ThreeD;
    const std::string* rv = keys.get("initial.r");
    const std::string* vv = keys.get("initial.v");
    if (!rv) fail("initial.r", "missing");
    if (!vv) fail("initial.v", "missing");
    auto r = parse_vector("initial.r", *rv);
    auto v = parse_vector("initial.v", *vv);
    if (r.size() != 3) fail("initial.r", "expected 3 components");
    if (v.size() != 3) fail("initial.v", "expected 3 components");
    cfg.init3.r = {r[0], r[1], r[2]};
    cfg.init3.v = {v[0], v[1], v[2]};
    if (const std::string* t0 = keys.get("initial.t0"))
      cfg.init3.t = parse_number("initial.t0", *t0);

    double speed = norm(cfg.init3.v);
    switch (cfg.spec.regime) {
      case Regime::Massive:
        if (speed >= cfg.c)
          fail("initial.v", "initial speed " + format_double(speed) +
                                " exceeds c for the massive regime");
        break;
      case Regime::Tachyon:
        if (speed <= cfg.c)
          fail("initial.v", "initial speed " + format_double(speed) +
                                " must exceed c for the tachyon regime");
        break;
      case Regime::Massless: {
        if (speed == 0.0) fail("initial.v", "direction of motion must be nonzero");
        cfg.init_direction = cfg.init3.v / speed;
        cfg.init3.v = cfg.c * cfg.init_direction;
        break;
      }
      case Regime::GeneralMass: {
        double beta2 = speed * speed / (cfg.c * cfg.c);
        double mval = 0.0;
        try {
          mval = sample_at(cfg.fields, cfg.init3, cfg.c).mass_sq;
        } catch (const Error& e) {
          fail("initial.r", e.what());
        }
        if (mval * (1.0 - beta2) <= 0.0)
          fail("initial.v", "M (1 - v^2/c^2) = " +
                                format_double(mval * (1.0 - beta2)) +
                                " is not positive at the initial state");
        break;
      }
    }
    note("initial.t0", format_double(cfg.init3.t));
    note("initial.r", *rv);
    note("initial.v", *vv);
  }

  // --- [integrate] ---------------------------------------------------------
  const std::string* horizon = keys.get("integrate.horizon");
  if (!horizon) fail("integrate.horizon", "missing");
  cfg.horizon = parse_number("integrate.horizon", *horizon);
  if (!(cfg.horizon > 0.0)) fail("integrate.horizon", "must be positive");
  note("integrate.horizon", format_double(cfg.horizon));

  if (const std::string* v = keys.get("integrate.parametrization")) {
    if (*v == "s") cfg.parametrization = RunConfig::Parametrization::S;
    else if (*v == "t") cfg.parametrization = RunConfig::Parametrization::T;
    else fail("integrate.parametrization", "expected s or t");
  } else {
    cfg.parametrization = cfg.init_form == RunConfig::InitForm::FourD
                              ? RunConfig::Parametrization::S
                              : RunConfig::Parametrization::T;
  }
  if (cfg.spec.regime == Regime::Massless &&
      cfg.parametrization == RunConfig::Parametrization::S)
    fail("integrate.parametrization", "massless runs march in observer time t");
  note("integrate.parametrization",
       cfg.parametrization == RunConfig::Parametrization::S ? "s" : "t");

  if (const std::string* v = keys.get("integrate.rel_tol")) {
    cfg.settings.rel_tol = parse_number("integrate.rel_tol", *v);
    if (!(cfg.settings.rel_tol > 0.0)) fail("integrate.rel_tol", "must be positive");
  }
  if (const std::string* v = keys.get("integrate.abs_tol")) {
    cfg.settings.abs_tol = parse_number("integrate.abs_tol", *v);
    if (!(cfg.settings.abs_tol > 0.0)) fail("integrate.abs_tol", "must be positive");
  }
  if (const std::string* v = keys.get("integrate.initial_step")) {
    cfg.settings.initial_step = parse_number("integrate.initial_step", *v);
    if (cfg.settings.initial_step < 0.0)
      fail("integrate.initial_step", "must be nonnegative");
  }
  if (const std::string* v = keys.get("integrate.samples")) {
    cfg.settings.samples = static_cast<int>(parse_number("integrate.samples", *v));
    if (cfg.settings.samples < 1) fail("integrate.samples", "need at least 1");
  }
  if (const std::string* v = keys.get("integrate.max_steps")) {
    cfg.settings.max_steps = static_cast<long>(parse_number("integrate.max_steps", *v));
    if (cfg.settings.max_steps < 1) fail("integrate.max_steps", "need at least 1");
  }
  note("integrate.rel_tol", format_double(cfg.settings.rel_tol));
  note("integrate.abs_tol", format_double(cfg.settings.abs_tol));
  note("integrate.samples", std::to_string(cfg.settings.samples));

  // --- [output] ------------------------------------------------------------
  if (const std::string* v = keys.get("output.trajectory")) cfg.out_trajectory = *v;
  if (const std::string* v = keys.get("output.diagnostics")) cfg.out_diagnostics = *v;
  note("output.trajectory", cfg.out_trajectory);
  note("output.diagnostics", cfg.out_diagnostics);

  keys.check_all_consumed();
  (void)origin;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_config_text(buf.str(), path);
}

}  // namespace relsim
