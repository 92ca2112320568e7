#include "marlmap/trace.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace marlmap {

TraceRecorder::TraceRecorder(Environment& env, std::uint64_t budget, bool wall_clock, SampleObserver observer)
    : env_(env),
      budget_(budget),
      wall_clock_(wall_clock),
      observer_(std::move(observer)),
      start_(std::chrono::steady_clock::now()) {
  trace_.rows.reserve(budget);
}

StepResult TraceRecorder::evaluate(std::span<const std::size_t> index) {
  if (exhausted()) throw std::logic_error("TraceRecorder: sample budget exhausted");
  StepResult result = env_.step(index);
  TraceRow row;
  row.step = trace_.rows.size() + 1;
  row.reward = result.reward;
  if (trace_.rows.empty() || result.reward > trace_.best_reward) {
    trace_.best_reward = result.reward;
    trace_.best_index.assign(index.begin(), index.end());
    trace_.best_step = row.step;
  }
  row.best_reward = trace_.best_reward;
  if (wall_clock_) {
    row.elapsed_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start_)
                         .count();
  }
  trace_.rows.push_back(row);
  if (observer_) observer_(index, result);
  return result;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

void write_trace_csv(std::ostream& out, const SearchTrace& trace) {
  out << "step,reward,best_reward,elapsed_ns\n";
  for (const auto& row : trace.rows) {
    out << row.step << ',' << format_double(row.reward) << ',' << format_double(row.best_reward) << ','
        << row.elapsed_ns << '\n';
  }
}

SearchTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "step,reward,best_reward,elapsed_ns") {
    throw std::runtime_error("trace CSV: missing or unexpected header");
  }
  SearchTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string step, reward, best, elapsed;
    if (!std::getline(fields, step, ',') || !std::getline(fields, reward, ',') || !std::getline(fields, best, ',') ||
        !std::getline(fields, elapsed)) {
      throw std::runtime_error("trace CSV line " + std::to_string(line_no) + ": expected 4 fields");
    }
    try {
      TraceRow row{std::stoull(step), std::stod(reward), std::stod(best), std::stoll(elapsed)};
      if (trace.rows.empty() || row.reward > trace.best_reward) {
        trace.best_reward = row.reward;
        trace.best_step = row.step;
      }
      trace.rows.push_back(row);
    } catch (const std::logic_error&) {
      throw std::runtime_error("trace CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return trace;
}

std::uint64_t steps_to_within(const SearchTrace& trace, double eps) {
  if (trace.rows.empty()) return 0;
  const double target = (1.0 - eps) * trace.rows.back().best_reward;
  for (const auto& row : trace.rows) {
    if (row.best_reward >= target) return row.step;
  }
  return trace.rows.back().step;
}

}  // namespace marlmap
