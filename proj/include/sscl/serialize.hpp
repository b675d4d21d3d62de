#pragma once

#include "sscl/sscl.hpp"

#include <string>

namespace sscl {

/// Model files are versioned JSON; doubles are written in shortest
/// round-trip form so a reload reproduces predictions bit for bit.
inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const SsclEnsemble& ensemble);
SsclEnsemble model_from_json(const std::string& text);

void save_model(const SsclEnsemble& ensemble, const std::string& path);
SsclEnsemble load_model(const std::string& path);

}  // namespace sscl
