#include "spinprobe/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spinprobe::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_coherence_csv(const std::filesystem::path& path, const CoherenceTrace& trace) {
  auto out = open_out(path);
  out << "t,re_rho01,im_rho01,abs_rho01\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto r = trace.rho01[k];
    out << format_double(trace.t[k]) << ',' << format_double(r.real()) << ',' << format_double(r.imag()) << ','
        << format_double(std::abs(r)) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

CoherenceTrace read_coherence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("t,re_rho01,im_rho01", 0) != 0) throw std::runtime_error(path.string() + ": unexpected CSV header");
  CoherenceTrace tr;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c, ',')) {
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    }
    tr.t.push_back(std::stod(a));
    tr.rho01.emplace_back(std::stod(b), std::stod(c));
  }
  return tr;
}

void write_correlation_csv(const std::filesystem::path& path, const CorrelationTrace& trace) {
  auto out = open_out(path);
  out << "t,re_c,im_c\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << format_double(trace.t[k]) << ',' << format_double(trace.c[k].real()) << ','
        << format_double(trace.c[k].imag()) << '\n';
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace spinprobe::io
