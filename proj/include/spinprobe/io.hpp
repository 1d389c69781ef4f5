// io.hpp: trace CSV files and JSON artifacts.

#pragma once

#include <filesystem>
#include <string>

#include "spinprobe/traces.hpp"

namespace spinprobe::io {

/// Shortest round-trip-safe text for a double (17 significant digits).
std::string format_double(double x);

/// Header `t,re_rho01,im_rho01,abs_rho01`, one row per sample.
void write_coherence_csv(const std::filesystem::path& path, const CoherenceTrace& trace);
CoherenceTrace read_coherence_csv(const std::filesystem::path& path);

void write_correlation_csv(const std::filesystem::path& path, const CorrelationTrace& trace);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace spinprobe::io
