#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ltm/params.hpp"

namespace ltm {

// Config files hold `key = value` lines with SI values, `#` comments and
// keys named after the field path (`nv.L21`, `cavity.kappa`, ...). Keys not
// present keep their ModelParams defaults.

// Every recognised key, in canonical emission order.
std::vector<std::string> config_keys();

double get_param(const ModelParams& params, std::string_view key);
void set_param(ModelParams& params, std::string_view key, double value);

// Parses without validating. Throws ConfigError (with line number).
ModelParams parse_config(std::string_view text);

// Applies a single `key=value` override. Throws ConfigError.
void apply_override(ModelParams& params, std::string_view assignment);

// parse + overrides + validate.
ModelParams load_config(const std::filesystem::path& path,
                        std::span<const std::string> overrides = {});

// Canonical text; parse_config(emit_config(p)) reproduces p bit-for-bit.
std::string emit_config(const ModelParams& params);

// FNV-1a 64 over the canonical emission, as 16 hex digits.
std::string params_hash(const ModelParams& params);
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Shortest round-trip decimal form.
std::string format_double(double value);
// Full-string strict parse; returns false on trailing garbage.
bool parse_double(std::string_view text, double& out);

}  // namespace ltm
