#ifndef GMFUSION_TRACE_HPP
#define GMFUSION_TRACE_HPP

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gmfusion/model.hpp"

namespace gmfusion {

struct trace_record {
  std::int64_t iteration = 0;
  double elapsed_seconds = 0;
  cost dual_bound = 0;
  std::optional<cost> best_energy;  // empty before the first primal
  std::string event;

  friend bool operator==(const trace_record&, const trace_record&) = default;
};

namespace trace_event {
inline constexpr std::string_view phi_sweep = "phi-sweep";
inline constexpr std::string_view lambda_sweep = "lambda-sweep";
inline constexpr std::string_view greedy = "greedy";
inline constexpr std::string_view lap = "lap";
inline constexpr std::string_view fusion = "fusion";
inline constexpr std::string_view improved = "improved";
}

// `none` stamps every record with 0 s, which makes traces reproducible
// byte for byte.
enum class trace_clock { wall, none };

class trace_recorder {
public:
  using clock_type = std::chrono::steady_clock;

  explicit trace_recorder(trace_clock clock = trace_clock::wall)
  : clock_(clock)
  , start_(clock_type::now())
  { }

  void set_best(cost energy) { best_ = energy; }
  std::optional<cost> best() const { return best_; }

  void record(std::int64_t iteration, cost dual_bound, std::string_view event)
  {
    const double t = clock_ == trace_clock::wall ? elapsed() : 0.0;
    records_.push_back({iteration, t, dual_bound, best_, std::string(event)});
  }

  // Wall time since construction, independent of the stamping mode.
  double elapsed() const
  {
    return std::chrono::duration<double>(clock_type::now() - start_).count();
  }

  const std::vector<trace_record>& records() const { return records_; }
  std::vector<trace_record> release() { return std::move(records_); }

private:
  trace_clock clock_;
  clock_type::time_point start_;
  std::optional<cost> best_;
  std::vector<trace_record> records_;
};

}

#endif
