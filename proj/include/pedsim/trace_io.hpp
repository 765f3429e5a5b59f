#ifndef PEDSIM_TRACE_IO_HPP_
#define PEDSIM_TRACE_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "pedsim/sim.hpp"

namespace pedsim {

inline constexpr const char *kTraceSchema = "pedsim.trace/1";

nlohmann::json to_json(const ControllerDiagnostics &d);
ControllerDiagnostics diagnostics_from_json(const nlohmann::json &j);

/// One tick as a flat object (the "tick" line of a trace file, also the
/// payload of a session Tick message).
nlohmann::json to_json(const TraceRecord &r);
TraceRecord record_from_json(const nlohmann::json &j);

struct TraceHeader
{
  std::string schema{kTraceSchema};
  std::string config_hash;
  std::uint64_t seed{0};
  std::string scenario;
  std::string controller;
  double dt_sim{0.0};
};

/// JSON Lines: header, one line per tick, footer. No wall-clock fields, so
/// identical runs give identical bytes.
void write_trace(std::ostream &os, const EpisodeTrace &trace, const std::string &config_hash);
void write_trace_file(const std::filesystem::path &path, const EpisodeTrace &trace, const std::string &config_hash);

struct LoadedTrace
{
  TraceHeader header;
  EpisodeTrace trace;
};

/// Throws std::runtime_error on malformed input or an unknown schema version.
LoadedTrace read_trace(std::istream &is);
LoadedTrace read_trace_file(const std::filesystem::path &path);

}  // namespace pedsim

#endif  // PEDSIM_TRACE_IO_HPP_
