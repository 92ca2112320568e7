#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "marlmap/environment.hpp"

namespace marlmap {

struct TraceRow {
  std::uint64_t step = 0;  // 1-based
  double reward = 0.0;
  double best_reward = 0.0;
  std::int64_t elapsed_ns = 0;
};

struct SearchTrace {
  std::vector<TraceRow> rows;
  IndexVector best_index;
  std::uint64_t best_step = 0;
  double best_reward = 0.0;

  // Per-parameter marginal distributions of the final policies (agents only).
  std::vector<std::vector<double>> final_marginals;

  std::size_t size() const { return rows.size(); }
};

// Called once per environment evaluation, in evaluation order.
using SampleObserver = std::function<void(std::span<const std::size_t> index, const StepResult& result)>;

// Steps an environment and keeps the running maximum. Every searcher funnels
// evaluations through one recorder so the sample budget is counted in one place.
class TraceRecorder {
 public:
  TraceRecorder(Environment& env, std::uint64_t budget, bool wall_clock = false, SampleObserver observer = {});

  StepResult evaluate(std::span<const std::size_t> index);

  std::uint64_t used() const { return trace_.rows.size(); }
  std::uint64_t remaining() const { return budget_ - used(); }
  bool exhausted() const { return used() >= budget_; }
  const SearchTrace& trace() const { return trace_; }
  SearchTrace release() { return std::move(trace_); }

 private:
  Environment& env_;
  std::uint64_t budget_;
  bool wall_clock_;
  SampleObserver observer_;
  std::chrono::steady_clock::time_point start_;
  SearchTrace trace_;
};

// CSV header: step,reward,best_reward,elapsed_ns
void write_trace_csv(std::ostream& out, const SearchTrace& trace);
SearchTrace read_trace_csv(std::istream& in);

// First 1-based step whose running best reaches (1 - eps) * final best.
std::uint64_t steps_to_within(const SearchTrace& trace, double eps);

// Shortest round-trippable decimal rendering; used for every CSV/JSON number.
std::string format_double(double x);

}  // namespace marlmap
