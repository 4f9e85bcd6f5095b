#include "ltm/config.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "ltm/error.hpp"

namespace ltm {

namespace {

struct Field {
  const char* key;
  double& (*ref)(ModelParams&);
  // Parse-time positivity (ensemble sizes, cavity, constants).
  bool must_be_positive;
};

#define LTM_FIELD(key, member, positive) \
  Field { key, [](ModelParams& p) -> double& { return p.member; }, positive }

const std::array kFields = {
    LTM_FIELD("nv.L21", nv.decay_21, false),
    LTM_FIELD("nv.L43", nv.decay_43, false),
    LTM_FIELD("nv.L25", nv.isc_25, false),
    LTM_FIELD("nv.L45", nv.isc_45, false),
    LTM_FIELD("nv.L56", nv.singlet_56, false),
    LTM_FIELD("nv.L61", nv.isc_61, false),
    LTM_FIELD("nv.L63", nv.isc_63, false),
    LTM_FIELD("nv.Gamma13", nv.dephasing_13, false),
    LTM_FIELD("nv.Lambda_NV", nv.pump_rate, false),
    LTM_FIELD("nv.Omega", nv.rabi, false),
    LTM_FIELD("nv.Delta", nv.detuning, false),
    LTM_FIELD("nv.G_S", nv.singlet_coupling, false),
    LTM_FIELD("nv.N_NV", nv.ensemble_size, true),
    LTM_FIELD("nv.pump_rate_per_watt", nv.pump_rate_per_watt, false),
    LTM_FIELD("mecsel.L_eg", mecsel.decay, false),
    LTM_FIELD("mecsel.G_eg", mecsel.gain_coupling, false),
    LTM_FIELD("mecsel.Lambda_ge", mecsel.pump_rate, false),
    LTM_FIELD("mecsel.N_2M", mecsel.ensemble_size, true),
    LTM_FIELD("mecsel.pump_rate_per_watt", mecsel.pump_rate_per_watt, false),
    LTM_FIELD("cavity.kappa", cavity.loss_rate, true),
    LTM_FIELD("cavity.kappa_mirror", cavity.mirror_loss_rate, true),
    LTM_FIELD("cavity.wavelength", cavity.wavelength, true),
    LTM_FIELD("constants.planck_h", constants.planck_h, true),
    LTM_FIELD("constants.electron_g", constants.electron_g, true),
    LTM_FIELD("constants.bohr_magneton", constants.bohr_magneton, true),
    LTM_FIELD("constants.speed_of_light", constants.speed_of_light, true),
};

#undef LTM_FIELD

const Field* find_field(std::string_view key) {
  for (const auto& f : kFields)
    if (key == f.key) return &f;
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void assign(ModelParams& params, std::string_view key, std::string_view value,
            int line) {
  const Field* field = find_field(key);
  if (!field) throw ConfigError(line, "unknown key '" + std::string(key) + "'");
  double v = 0.0;
  if (!parse_double(value, v))
    throw ConfigError(line, "cannot parse value '" + std::string(value) +
                                "' for key '" + std::string(key) + "'");
  if (field->must_be_positive && !(v > 0.0))
    throw ConfigError(line, "value for '" + std::string(key) +
                                "' must be positive");
  field->ref(params) = v;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : kFields) keys.emplace_back(f.key);
  return keys;
}

double get_param(const ModelParams& params, std::string_view key) {
  const Field* field = find_field(key);
  if (!field) throw ConfigError(0, "unknown key '" + std::string(key) + "'");
  return field->ref(const_cast<ModelParams&>(params));
}

void set_param(ModelParams& params, std::string_view key, double value) {
  const Field* field = find_field(key);
  if (!field) throw ConfigError(0, "unknown key '" + std::string(key) + "'");
  field->ref(params) = value;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

ModelParams parse_config(std::string_view text) {
  ModelParams params;
  std::unordered_set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key");
    if (!seen.insert(std::string(key)).second)
      throw ConfigError(line_no, "duplicate key '" + std::string(key) + "'");
    assign(params, key, value, line_no);
  }
  return params;
}

void apply_override(ModelParams& params, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError(0, "override '" + std::string(assignment) +
                             "' is not of the form key=value");
  assign(params, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)),
         0);
}

ModelParams load_config(const std::filesystem::path& path,
                        std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(0, "cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ModelParams params = parse_config(buf.str());
  for (const auto& o : overrides) apply_override(params, o);
  validate(params);
  return params;
}

std::string emit_config(const ModelParams& params) {
  std::string out;
  for (const auto& f : kFields) {
    out += f.key;
    out += " = ";
    out += format_double(f.ref(const_cast<ModelParams&>(params)));
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string params_hash(const ModelParams& params) {
  return hex64(fnv1a64(emit_config(params)));
}

}  // namespace ltm
