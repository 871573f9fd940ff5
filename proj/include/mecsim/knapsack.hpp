#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mecsim/types.hpp"

namespace mecsim::knapsack {

// Value/choice tables of the capacity-indexed recursion.  Row 0 is the empty
// prefix; rows 1..F-1 cover every capacity, row F is only evaluated at full
// capacity, which is all the backtracking pass ever reads.
struct DpTables {
  int items = 0;
  std::int64_t capacity = 0;
  std::vector<double> value;         // (items+1) x (capacity+1)
  std::vector<std::uint8_t> choice;  // same shape

  double val(int f, std::int64_t c) const {
    return value[static_cast<std::size_t>(f) * static_cast<std::size_t>(capacity + 1) +
                 static_cast<std::size_t>(c)];
  }
  std::uint8_t take(int f, std::int64_t c) const {
    return choice[static_cast<std::size_t>(f) * static_cast<std::size_t>(capacity + 1) +
                  static_cast<std::size_t>(c)];
  }
};

std::vector<std::int64_t> sizes_to_units(const std::vector<double>& sizes_bytes, double unit_bytes);

DpTables build_tables(const std::vector<double>& values, const std::vector<std::int64_t>& size_units,
                      std::int64_t capacity_units);

// 0/1 selection maximising the summed values under the capacity, on a unit
// grid.  Sizes round up to whole units, so the returned selection never
// exceeds the byte capacity.  Items with non-positive value are never taken.
CacheState solve(const std::vector<double>& values, const std::vector<double>& sizes_bytes,
                 double capacity_bytes, double unit_bytes);
CacheState solve_units(const std::vector<double>& values, const std::vector<std::int64_t>& size_units,
                       std::int64_t capacity_units);

// Optimal summed value under the capacity; the bootstrap target's max over
// caching actions.
double max_value(const std::vector<double>& values, const std::vector<double>& sizes_bytes,
                 double capacity_bytes, double unit_bytes);
double max_value_units(const std::vector<double>& values, const std::vector<std::int64_t>& size_units,
                       std::int64_t capacity_units);

// Exhaustive optimality oracle over all 2^F subsets at exact byte sizes.
// Guarded to F <= 20.
std::pair<CacheState, double> brute_force(const std::vector<double>& values,
                                          const std::vector<double>& sizes_bytes,
                                          double capacity_bytes);

}  // namespace mecsim::knapsack
