#include "bpsim/csvio.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include "bpsim/hash.hpp"

namespace bpsim {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), end);
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

namespace {

void row(std::string& out, const std::string& kind, std::int64_t slot,
         const std::string& id, const std::string& value) {
  out += kind;
  out += ',';
  out += std::to_string(slot);
  out += ',';
  out += id;
  out += ',';
  out += value;
  out += '\n';
}

}  // namespace

std::string trace_csv(const Trace& tr) {
  std::string out = "#schema=bpsim.trace.v1\n";
  out += "#scenario=" + to_hex(tr.scenario_hash) + "\n";
  out += "kind,slot,id,value\n";
  for (const SlotRecord& rec : tr.slots) {
    for (std::size_t j = 0; j < rec.decisions.size(); ++j)
      row(out, "decision", rec.slot, std::to_string(j),
          std::to_string(rec.decisions[j]));
    // zero arrival and discharge rows are omitted; absent means zero
    for (std::size_t a = 0; a < rec.arrivals.size(); ++a)
      if (rec.arrivals[a] != 0.0)
        row(out, "arrival", rec.slot, std::to_string(a),
            format_double(rec.arrivals[a]));
    for (std::size_t g = 0; g < rec.discharges.size(); ++g)
      if (rec.discharges[g] != 0.0)
        row(out, "discharge", rec.slot, std::to_string(g),
            format_double(rec.discharges[g]));
    for (std::size_t a = 0; a < rec.queues.size(); ++a)
      row(out, "queue", rec.slot, std::to_string(a),
          format_double(rec.queues[a]));
    row(out, "lyapunov", rec.slot, "", format_double(rec.lyapunov));
    row(out, "exited", rec.slot, "", format_double(rec.exited));
    row(out, "breach", rec.slot, "", rec.capacity_breach ? "1" : "0");
  }
  return out;
}

std::string stability_csv(const StabilityReport& rep) {
  std::string out = "#schema=bpsim.stability.v1\n";
  out += "kind,threshold,id,value\n";
  for (std::size_t vi = 0; vi < rep.thresholds.size(); ++vi) {
    const std::string v = format_double(rep.thresholds[vi]);
    for (std::size_t a = 0; a < rep.per_queue[vi].size(); ++a)
      out += "queue," + v + "," + std::to_string(a) + "," +
             format_double(rep.per_queue[vi][a]) + "\n";
    out += "worst," + v + ",," + format_double(rep.worst[vi]) + "\n";
  }
  out += "tail_slope,,," + format_double(rep.tail_slope) + "\n";
  return out;
}

std::string drift_csv(const LyapunovSeries& series) {
  std::string out = "#schema=bpsim.drift.v1\n";
  out += "bin,lo,hi,count,mean_drift\n";
  for (std::size_t i = 0; i < series.bins.size(); ++i) {
    const DriftBin& b = series.bins[i];
    out += std::to_string(i) + "," + format_double(b.lo) + "," +
           format_double(b.hi) + "," + std::to_string(b.count) + "," +
           format_double(b.mean_drift) + "\n";
  }
  return out;
}

std::string sweep_csv(
    const std::vector<std::pair<std::string, SweepResult>>& runs) {
  std::string out = "#schema=bpsim.sweep.v1\n";
  out += "controller,kind,rho,value\n";
  for (const auto& [name, res] : runs) {
    for (const SweepEvaluation& e : res.evaluations)
      out += name + ",eval," + format_double(e.rho) + "," +
             (e.passed ? "1" : "0") + "\n";
    out += name + ",rho_hat," + format_double(res.rho_hat) + "," +
           (res.hit_upper_bound ? "1" : "0") + "\n";
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = "#schema=bpsim.metrics.v1\n";
  out += "controller,metric,value\n";
  for (const MetricRow& r : rows)
    out += r.controller + "," + r.metric + "," + format_double(r.value) + "\n";
  return out;
}

}  // namespace bpsim
