#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dipolar/cloud.hpp"
#include "dipolar/errors.hpp"

namespace dipolar {

enum class Column { n3, n2, n1, temperature, sigma_x, sigma_y, sigma_z, volume };

inline constexpr std::array<Column, 8> all_columns{Column::n3,      Column::n2,      Column::n1,
                                                   Column::temperature, Column::sigma_x,
                                                   Column::sigma_y, Column::sigma_z, Column::volume};

/// Sampled observations. All values SI (K, m, m^3, atom counts).
struct TimeSeries {
  std::vector<double> times;
  std::map<Column, std::vector<double>> columns;
  // Per-point 1-sigma uncertainty of whichever column a fit targets.
  std::optional<std::vector<double>> noise_sigma;

  std::size_t size() const { return times.size(); }
  bool has(Column c) const { return columns.count(c) != 0; }

  const std::vector<double>& at(Column c) const {
    auto it = columns.find(c);
    if (it == columns.end()) throw InvalidInput("time series lacks a required column");
    return it->second;
  }

  void validate() const {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!std::isfinite(times[i])) throw InvalidInput("time values must be finite");
      if (i > 0 && !(times[i] > times[i - 1]))
        throw InvalidInput("time values must be strictly increasing");
    }
    for (const auto& [col, values] : columns) {
      if (values.size() != times.size()) throw InvalidInput("column lengths differ from time axis");
      for (double v : values)
        if (!std::isfinite(v)) throw InvalidInput("column values must be finite");
    }
    if (noise_sigma && noise_sigma->size() != times.size())
      throw InvalidInput("noise_sigma length differs from time axis");
  }

  /// Copy with rows sorted by time. Duplicate times are rejected.
  TimeSeries sorted() const {
    if (noise_sigma && noise_sigma->size() != times.size())
      throw InvalidInput("noise_sigma length differs from time axis");
    for (const auto& [col, values] : columns)
      if (values.size() != times.size()) throw InvalidInput("column lengths differ from time axis");
    std::vector<std::size_t> order(times.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    TimeSeries out;
    out.times.reserve(times.size());
    for (std::size_t i : order) out.times.push_back(times[i]);
    for (const auto& [col, values] : columns) {
      auto& dst = out.columns[col];
      for (std::size_t i : order) dst.push_back(values[i]);
    }
    if (noise_sigma) {
      out.noise_sigma.emplace();
      for (std::size_t i : order) out.noise_sigma->push_back((*noise_sigma)[i]);
    }
    out.validate();
    return out;
  }

  /// First `count` rows.
  TimeSeries head(std::size_t count) const {
    count = std::min(count, size());
    TimeSeries out;
    out.times.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(count));
    for (const auto& [col, values] : columns)
      out.columns[col].assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(count));
    if (noise_sigma)
      out.noise_sigma.emplace(noise_sigma->begin(),
                              noise_sigma->begin() + static_cast<std::ptrdiff_t>(count));
    return out;
  }

  /// Rows with t <= t_max (times must be sorted).
  TimeSeries until(double t_max) const {
    std::size_t count = 0;
    while (count < size() && times[count] <= t_max) ++count;
    return head(count);
  }
};

/// Mean-volume series: the V column if present, otherwise built from the
/// three width columns.
inline std::optional<std::vector<double>> volume_series(const TimeSeries& ts) {
  if (ts.has(Column::volume)) return ts.at(Column::volume);
  if (ts.has(Column::sigma_x) && ts.has(Column::sigma_y) && ts.has(Column::sigma_z)) {
    std::vector<double> v(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
      v[i] = mean_volume({ts.at(Column::sigma_x)[i], ts.at(Column::sigma_y)[i],
                          ts.at(Column::sigma_z)[i]});
    return v;
  }
  return std::nullopt;
}

/// Converts a simulated trajectory to a series with N3, N2, N1, T and V.
inline TimeSeries to_timeseries(const std::vector<CloudState>& traj, const TrapConfig& trap,
                                const SpeciesConfig& s) {
  TimeSeries ts;
  for (const auto& c : traj) {
    ts.times.push_back(c.time);
    ts.columns[Column::n3].push_back(c.n3);
    ts.columns[Column::n2].push_back(c.n2);
    ts.columns[Column::n1].push_back(c.n1);
    ts.columns[Column::temperature].push_back(c.temperature);
    ts.columns[Column::volume].push_back(cloud_volume(c, trap, s));
  }
  return ts;
}

}  // namespace dipolar
