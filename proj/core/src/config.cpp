#include "maser/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "maser/errors.hpp"
#include "maser/walls.hpp"

namespace maser {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct Cursor {
  int line = 0;
  int col = 0;
};

[[noreturn]] void fail(const std::string& msg, Cursor at) {
  throw ParseError(msg, at.line, at.col);
}

bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

struct Value {
  std::string text;
  Cursor at;
};

double to_double(const Value& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v.text, &used);
    if (used != v.text.size()) fail("trailing characters after number", v.at);
    return x;
  } catch (const std::invalid_argument&) {
    fail("expected a number, got '" + v.text + "'", v.at);
  } catch (const std::out_of_range&) {
    fail("number out of range", v.at);
  }
}

std::int64_t to_int(const Value& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v.text, &used);
    if (used != v.text.size()) fail("trailing characters after integer", v.at);
    return x;
  } catch (const std::invalid_argument&) {
    fail("expected an integer, got '" + v.text + "'", v.at);
  } catch (const std::out_of_range&) {
    fail("integer out of range", v.at);
  }
}

std::uint64_t to_uint(const Value& v) {
  if (!v.text.empty() && v.text[0] == '-') fail("expected a nonnegative integer", v.at);
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v.text, &used);
    if (used != v.text.size()) fail("trailing characters after integer", v.at);
    return x;
  } catch (const std::invalid_argument&) {
    fail("expected an integer, got '" + v.text + "'", v.at);
  } catch (const std::out_of_range&) {
    fail("integer out of range", v.at);
  }
}

std::vector<Value> split_items(const Value& v) {
  std::vector<Value> items;
  std::size_t i = 0;
  while (i < v.text.size()) {
    while (i < v.text.size() && std::isspace(static_cast<unsigned char>(v.text[i]))) ++i;
    if (i >= v.text.size()) break;
    std::size_t start = i;
    while (i < v.text.size() && !std::isspace(static_cast<unsigned char>(v.text[i]))) ++i;
    items.push_back({v.text.substr(start, i - start),
                     {v.at.line, v.at.col + static_cast<int>(start)}});
  }
  return items;
}

// Lists are whitespace-separated values; a single first:step:last item
// expands to the inclusive arithmetic range.
std::vector<double> to_double_list(const Value& v) {
  std::vector<double> out;
  for (const Value& item : split_items(v)) {
    const auto c1 = item.text.find(':');
    if (c1 == std::string::npos) {
      out.push_back(to_double(item));
      continue;
    }
    const auto c2 = item.text.find(':', c1 + 1);
    if (c2 == std::string::npos) fail("range needs first:step:last", item.at);
    const double first = to_double({item.text.substr(0, c1), item.at});
    const double step = to_double({item.text.substr(c1 + 1, c2 - c1 - 1), item.at});
    const double last = to_double({item.text.substr(c2 + 1), item.at});
    if (step == 0.0) fail("range step must be nonzero", item.at);
    const double span = (last - first) / step;
    if (span < -1e-9) fail("range is empty", item.at);
    const long count = static_cast<long>(std::floor(span + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) out.push_back(first + step * i);
  }
  return out;
}

std::vector<std::int64_t> to_int_list(const Value& v) {
  std::vector<std::int64_t> out;
  for (const Value& item : split_items(v)) {
    const auto c1 = item.text.find(':');
    if (c1 == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    const auto c2 = item.text.find(':', c1 + 1);
    if (c2 == std::string::npos) fail("range needs first:step:last", item.at);
    const std::int64_t first = to_int({item.text.substr(0, c1), item.at});
    const std::int64_t step = to_int({item.text.substr(c1 + 1, c2 - c1 - 1), item.at});
    const std::int64_t last = to_int({item.text.substr(c2 + 1), item.at});
    if (step == 0) fail("range step must be nonzero", item.at);
    if ((last - first) % step != 0 && (last - first) / step < 0)
      fail("range is empty", item.at);
    for (std::int64_t x = first; step > 0 ? x <= last : x >= last; x += step)
      out.push_back(x);
  }
  return out;
}

}  // namespace

AtomState RunConfig::atom() const {
  return {Complex(model.c_g.value_or(1.0), 0.0),
          Complex(model.c_e.value_or(0.0), 0.0)};
}

double RunConfig::resolved_phi() const {
  if (model.phi) return *model.phi;
  return phi_for_wall(model.m.value(), model.K.value());
}

RunConfig parse_config_raw(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string section;
  Cursor section_at;

  std::istringstream stream(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(stream, raw)) {
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::size_t i = 0;
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    if (i >= raw.size() || raw[i] == '#' || raw[i] == ';') continue;

    if (raw[i] == '[') {
      const auto close = raw.find(']', i);
      if (close == std::string::npos)
        fail("unterminated section header", {lineno, static_cast<int>(i) + 1});
      section = raw.substr(i + 1, close - i - 1);
      section_at = {lineno, static_cast<int>(i) + 1};
      if (section != "model" && section != "noise" && section != "run")
        fail("unknown section [" + section + "]", section_at);
      for (std::size_t j = close + 1; j < raw.size(); ++j) {
        if (!std::isspace(static_cast<unsigned char>(raw[j])))
          fail("trailing characters after section header",
               {lineno, static_cast<int>(j) + 1});
      }
      continue;
    }

    const Cursor key_at{lineno, static_cast<int>(i) + 1};
    if (section.empty()) fail("key outside any section", key_at);
    std::size_t key_start = i;
    while (i < raw.size() && is_key_char(raw[i])) ++i;
    const std::string key = raw.substr(key_start, i - key_start);
    if (key.empty()) fail("expected a key", key_at);
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    if (i >= raw.size() || raw[i] != '=')
      fail("expected '=' after key '" + key + "'",
           {lineno, static_cast<int>(i) + 1});
    ++i;
    while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
    std::size_t end = raw.size();
    while (end > i && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    const Value value{raw.substr(i, end - i), {lineno, static_cast<int>(i) + 1}};
    if (value.text.empty()) fail("empty value for key '" + key + "'", value.at);

    const std::string qualified = section + "." + key;
    if (!seen.insert(qualified).second)
      fail("duplicate key '" + key + "' in section [" + section + "]", key_at);

    if (section == "model") {
      if (key == "c_g") cfg.model.c_g = to_double(value);
      else if (key == "c_e") cfg.model.c_e = to_double(value);
      else if (key == "phi") cfg.model.phi = to_double(value);
      else if (key == "m") cfg.model.m = to_int(value);
      else if (key == "K") cfg.model.K = to_int(value);
      else if (key == "nu") cfg.model.nu = to_double(value);
      else if (key == "n_max") cfg.model.n_max = static_cast<int>(to_int(value));
      else fail("unknown key '" + key + "' in section [model]", key_at);
    } else if (section == "noise") {
      if (key == "kappa") cfg.noise.kappa = to_double(value);
      else if (key == "n_th") cfg.noise.n_th = to_double(value);
      else if (key == "gamma_01") cfg.noise.gamma_01 = to_double(value);
      else if (key == "gamma_03") cfg.noise.gamma_03 = to_double(value);
      else if (key == "gamma_13") cfg.noise.gamma_13 = to_double(value);
      else if (key == "gamma_23") cfg.noise.gamma_23 = to_double(value);
      else if (key == "gamma_1") cfg.noise.gamma_1 = to_double(value);
      else if (key == "gamma_3") cfg.noise.gamma_3 = to_double(value);
      else if (key == "t_prep") cfg.noise.t_prep = to_double(value);
      else if (key == "sigma") cfg.noise.sigma = to_double(value);
      else if (key == "seed") cfg.noise.seed = to_uint(value);
      else fail("unknown key '" + key + "' in section [noise]", key_at);
    } else {
      if (key == "command") cfg.run.command = value.text;
      else if (key == "times") cfg.run.times = to_double_list(value);
      else if (key == "atoms") cfg.run.atoms = to_int_list(value);
      else if (key == "c_e_values") cfg.run.c_e_values = to_double_list(value);
      else if (key == "K_values") cfg.run.K_values = to_int_list(value);
      else if (key == "out") cfg.run.out = value.text;
      else if (key == "format") cfg.run.format = value.text;
      else if (key == "jobs") cfg.run.jobs = static_cast<int>(to_int(value));
      else if (key == "beam") cfg.run.beam = value.text;
      else if (key == "mc_samples") cfg.run.mc_samples = static_cast<int>(to_int(value));
      else if (key == "modes") cfg.run.modes = static_cast<int>(to_int(value));
      else if (key == "wigner_range") cfg.run.wigner_range = to_double(value);
      else if (key == "wigner_resolution")
        cfg.run.wigner_resolution = static_cast<int>(to_int(value));
      else fail("unknown key '" + key + "' in section [run]", key_at);
    }
  }
  return cfg;
}

void validate_config(RunConfig& cfg) {
  auto require = [](bool ok, const std::string& msg, const std::string& field) {
    if (!ok) throw ValidationError(msg, field);
  };

  require(cfg.model.n_max >= 2, "n_max must be at least 2", "n_max");
  require(cfg.model.nu >= 0.0, "nu must be nonnegative", "nu");

  static const std::set<std::string> kCommands = {
      "steady", "evolve", "spectrum", "walls", "wigner", "metastable", "sweep"};
  require(cfg.run.command.empty() || kCommands.count(cfg.run.command) != 0,
          "unknown command '" + cfg.run.command + "'", "command");

  const bool sweep = cfg.run.command == "sweep";
  const bool has_phi = cfg.model.phi.has_value();
  const bool has_m = cfg.model.m.has_value();
  const bool has_K = cfg.model.K.has_value();
  if (sweep) {
    require(!has_phi, "sweep derives phi from the wall grid", "phi");
    require(!has_K, "sweep takes its wall indices from K_values", "K");
    require(cfg.run.K_values.empty() || has_m,
            "sweep needs the wall position m", "m");
    if (has_m) require(*cfg.model.m >= 0, "m must be nonnegative", "m");
    for (std::int64_t k : cfg.run.K_values)
      require(k >= 1, "K_values entries must be positive", "K_values");
    for (double ce : cfg.run.c_e_values)
      require(std::abs(ce) <= 1.0, "c_e_values entries must lie in [-1, 1]",
              "c_e_values");
  } else {
    require(has_m == has_K, "a wall spec needs both m and K",
            has_m ? "K" : "m");
    require(has_phi != (has_m && has_K), "exactly one of phi or (m, K)",
            "phi");
    if (has_m) {
      require(*cfg.model.m >= 0, "m must be nonnegative", "m");
      require(*cfg.model.K >= 1, "K must be positive", "K");
    }
  }

  if (cfg.model.c_g && cfg.model.c_e) {
    const double norm2 = *cfg.model.c_g * *cfg.model.c_g +
                         *cfg.model.c_e * *cfg.model.c_e;
    require(std::abs(norm2 - 1.0) <= 1e-9,
            "atom amplitudes must satisfy c_g^2 + c_e^2 = 1", "c_g");
  } else if (cfg.model.c_e) {
    require(std::abs(*cfg.model.c_e) <= 1.0, "c_e must lie in [-1, 1]", "c_e");
    cfg.model.c_g = std::sqrt(1.0 - *cfg.model.c_e * *cfg.model.c_e);
  } else if (cfg.model.c_g) {
    require(std::abs(*cfg.model.c_g) <= 1.0, "c_g must lie in [-1, 1]", "c_g");
    cfg.model.c_e = std::sqrt(1.0 - *cfg.model.c_g * *cfg.model.c_g);
  } else {
    cfg.model.c_g = 1.0;
    cfg.model.c_e = 0.0;
  }

  const std::pair<double, const char*> rates[] = {
      {cfg.noise.kappa, "kappa"},       {cfg.noise.n_th, "n_th"},
      {cfg.noise.gamma_01, "gamma_01"}, {cfg.noise.gamma_03, "gamma_03"},
      {cfg.noise.gamma_13, "gamma_13"}, {cfg.noise.gamma_23, "gamma_23"},
      {cfg.noise.gamma_1, "gamma_1"},   {cfg.noise.gamma_3, "gamma_3"},
      {cfg.noise.t_prep, "t_prep"},     {cfg.noise.sigma, "sigma"}};
  for (const auto& [value, name] : rates)
    require(value >= 0.0, std::string(name) + " must be nonnegative", name);

  require(cfg.run.jobs >= 1, "jobs must be at least 1", "jobs");
  require(cfg.run.format == "csv" || cfg.run.format == "json",
          "format must be csv or json", "format");
  require(cfg.run.beam == "gauss" || cfg.run.beam == "mc",
          "beam must be gauss or mc", "beam");
  if (cfg.run.beam == "mc")
    require(cfg.noise.seed.has_value(),
            "Monte Carlo beam sampling needs a seed", "seed");
  require(cfg.run.mc_samples >= 1, "mc_samples must be positive", "mc_samples");
  require(cfg.run.modes >= 0, "modes must be nonnegative", "modes");
  require(cfg.run.wigner_range > 0.0, "wigner_range must be positive",
          "wigner_range");
  require(cfg.run.wigner_resolution >= 2,
          "wigner_resolution must be at least 2", "wigner_resolution");

  double prev = 0.0;
  for (double t : cfg.run.times) {
    require(t >= prev, "times must be ascending and nonnegative", "times");
    prev = t;
  }
  for (std::int64_t k : cfg.run.atoms)
    require(k >= 0, "atoms entries must be nonnegative", "atoms");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg = parse_config_raw(text);
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open config", path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto opt = [](const std::optional<double>& v) {
    return v ? fmt17(*v) : std::string("-");
  };
  os << "model.c_g=" << opt(cfg.model.c_g) << '\n';
  os << "model.c_e=" << opt(cfg.model.c_e) << '\n';
  os << "model.phi=" << opt(cfg.model.phi) << '\n';
  os << "model.m=" << (cfg.model.m ? std::to_string(*cfg.model.m) : "-") << '\n';
  os << "model.K=" << (cfg.model.K ? std::to_string(*cfg.model.K) : "-") << '\n';
  os << "model.nu=" << fmt17(cfg.model.nu) << '\n';
  os << "model.n_max=" << cfg.model.n_max << '\n';
  os << "noise.kappa=" << fmt17(cfg.noise.kappa) << '\n';
  os << "noise.n_th=" << fmt17(cfg.noise.n_th) << '\n';
  os << "noise.gamma_01=" << fmt17(cfg.noise.gamma_01) << '\n';
  os << "noise.gamma_03=" << fmt17(cfg.noise.gamma_03) << '\n';
  os << "noise.gamma_13=" << fmt17(cfg.noise.gamma_13) << '\n';
  os << "noise.gamma_23=" << fmt17(cfg.noise.gamma_23) << '\n';
  os << "noise.gamma_1=" << fmt17(cfg.noise.gamma_1) << '\n';
  os << "noise.gamma_3=" << fmt17(cfg.noise.gamma_3) << '\n';
  os << "noise.t_prep=" << fmt17(cfg.noise.t_prep) << '\n';
  os << "noise.sigma=" << fmt17(cfg.noise.sigma) << '\n';
  os << "noise.seed=" << (cfg.noise.seed ? std::to_string(*cfg.noise.seed) : "-")
     << '\n';
  os << "run.command=" << cfg.run.command << '\n';
  os << "run.times=";
  for (std::size_t i = 0; i < cfg.run.times.size(); ++i)
    os << (i ? " " : "") << fmt17(cfg.run.times[i]);
  os << '\n';
  os << "run.atoms=";
  for (std::size_t i = 0; i < cfg.run.atoms.size(); ++i)
    os << (i ? " " : "") << cfg.run.atoms[i];
  os << '\n';
  os << "run.c_e_values=";
  for (std::size_t i = 0; i < cfg.run.c_e_values.size(); ++i)
    os << (i ? " " : "") << fmt17(cfg.run.c_e_values[i]);
  os << '\n';
  os << "run.K_values=";
  for (std::size_t i = 0; i < cfg.run.K_values.size(); ++i)
    os << (i ? " " : "") << cfg.run.K_values[i];
  os << '\n';
  os << "run.format=" << cfg.run.format << '\n';
  os << "run.beam=" << cfg.run.beam << '\n';
  os << "run.mc_samples=" << cfg.run.mc_samples << '\n';
  os << "run.modes=" << cfg.run.modes << '\n';
  os << "run.wigner_range=" << fmt17(cfg.run.wigner_range) << '\n';
  os << "run.wigner_resolution=" << cfg.run.wigner_resolution << '\n';
  return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string text = canonical_config(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace maser
