#include "mecsim/knapsack.hpp"

#include <cmath>
#include <stdexcept>

namespace mecsim::knapsack {

namespace {

// Single cell of the recursion; taking the item must strictly beat skipping
// it, so zero-valued and negative items are never selected.
void fill_cell(DpTables& t, int f, std::int64_t c, double value, std::int64_t size) {
  const std::size_t row = static_cast<std::size_t>(f) * static_cast<std::size_t>(t.capacity + 1);
  const std::size_t prev = row - static_cast<std::size_t>(t.capacity + 1);
  const double skip = t.value[prev + static_cast<std::size_t>(c)];
  double best = skip;
  std::uint8_t take = 0;
  if (size <= c) {
    const double with = t.value[prev + static_cast<std::size_t>(c - size)] + value;
    if (with > skip) {
      best = with;
      take = 1;
    }
  }
  t.value[row + static_cast<std::size_t>(c)] = best;
  t.choice[row + static_cast<std::size_t>(c)] = take;
}

}  // namespace

std::vector<std::int64_t> sizes_to_units(const std::vector<double>& sizes_bytes,
                                         double unit_bytes) {
  if (!(unit_bytes > 0)) throw std::invalid_argument("capacity unit must be positive");
  std::vector<std::int64_t> units(sizes_bytes.size());
  for (std::size_t f = 0; f < sizes_bytes.size(); ++f) {
    if (!(sizes_bytes[f] > 0)) throw std::invalid_argument("software sizes must be positive");
    units[f] = static_cast<std::int64_t>(std::ceil(sizes_bytes[f] / unit_bytes));
    if (units[f] < 1) units[f] = 1;
  }
  return units;
}

DpTables build_tables(const std::vector<double>& values,
                      const std::vector<std::int64_t>& size_units, std::int64_t capacity_units) {
  if (values.size() != size_units.size())
    throw std::invalid_argument("value and size vectors differ in length");
  if (capacity_units < 0) throw std::invalid_argument("capacity must be non-negative");

  DpTables t;
  t.items = static_cast<int>(values.size());
  t.capacity = capacity_units;
  const std::size_t cells =
      static_cast<std::size_t>(t.items + 1) * static_cast<std::size_t>(capacity_units + 1);
  t.value.assign(cells, 0.0);
  t.choice.assign(cells, 0);

  // full rows for the first F-1 items; the last row is only ever read at the
  // full capacity, where the backtracking pass starts
  for (int f = 1; f < t.items; ++f)
    for (std::int64_t c = 0; c <= capacity_units; ++c)
      fill_cell(t, f, c, values[static_cast<std::size_t>(f - 1)],
                size_units[static_cast<std::size_t>(f - 1)]);
  if (t.items >= 1)
    fill_cell(t, t.items, capacity_units, values[static_cast<std::size_t>(t.items - 1)],
              size_units[static_cast<std::size_t>(t.items - 1)]);
  return t;
}

CacheState solve_units(const std::vector<double>& values,
                       const std::vector<std::int64_t>& size_units, std::int64_t capacity_units) {
  const DpTables t = build_tables(values, size_units, capacity_units);
  CacheState picked(values.size(), 0);
  std::int64_t remaining = capacity_units;
  for (int f = t.items; f >= 1; --f) {
    if (t.take(f, remaining)) {
      picked[static_cast<std::size_t>(f - 1)] = 1;
      remaining -= size_units[static_cast<std::size_t>(f - 1)];
    }
  }
  return picked;
}

double max_value_units(const std::vector<double>& values,
                       const std::vector<std::int64_t>& size_units, std::int64_t capacity_units) {
  if (values.empty()) return 0.0;
  const DpTables t = build_tables(values, size_units, capacity_units);
  return t.val(t.items, capacity_units);
}

CacheState solve(const std::vector<double>& values, const std::vector<double>& sizes_bytes,
                 double capacity_bytes, double unit_bytes) {
  const auto units = sizes_to_units(sizes_bytes, unit_bytes);
  const auto capacity = static_cast<std::int64_t>(std::floor(capacity_bytes / unit_bytes));
  return solve_units(values, units, capacity);
}

double max_value(const std::vector<double>& values, const std::vector<double>& sizes_bytes,
                 double capacity_bytes, double unit_bytes) {
  const auto units = sizes_to_units(sizes_bytes, unit_bytes);
  const auto capacity = static_cast<std::int64_t>(std::floor(capacity_bytes / unit_bytes));
  return max_value_units(values, units, capacity);
}

std::pair<CacheState, double> brute_force(const std::vector<double>& values,
                                          const std::vector<double>& sizes_bytes,
                                          double capacity_bytes) {
  const std::size_t n = values.size();
  if (n > 20) throw std::invalid_argument("exhaustive search is guarded to 20 items");
  if (values.size() != sizes_bytes.size())
    throw std::invalid_argument("value and size vectors differ in length");

  double best_value = 0.0;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double size = 0, value = 0;
    for (std::size_t f = 0; f < n; ++f) {
      if (mask & (1u << f)) {
        size += sizes_bytes[f];
        value += values[f];
      }
    }
    if (size <= capacity_bytes && value > best_value) {
      best_value = value;
      best_mask = mask;
    }
  }
  CacheState picked(n, 0);
  for (std::size_t f = 0; f < n; ++f)
    if (best_mask & (1u << f)) picked[f] = 1;
  return {picked, best_value};
}

}  // namespace mecsim::knapsack
