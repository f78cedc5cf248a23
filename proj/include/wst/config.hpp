#pragma once

#include "wst/pipeline.hpp"

#include <optional>
#include <string>

namespace wst::config {

struct RunSettings {
    pipeline::HybridConfig hybrid;
    pipeline::Variant variant = pipeline::Variant::WaveletSarimaTransformer;
};

/// Line-oriented `key = value` file with [pipeline], [sarima] and
/// [transformer] sections. Unknown sections or keys are errors; '#' and ';'
/// start comments.
RunSettings load_run_config(const std::string& path);

/// Parses one key into `settings`; exposed so CLI flag overrides reuse the
/// same validation. Section is "pipeline", "sarima" or "transformer".
void apply_setting(RunSettings& settings, const std::string& section,
                   const std::string& key, const std::string& value);

} // namespace wst::config
