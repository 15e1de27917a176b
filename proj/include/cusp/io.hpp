#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "cusp/integrate.hpp"

namespace cusp {

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Provenance lines, emitted as "# key: value" before the CSV header.
using Provenance = std::vector<std::pair<std::string, std::string>>;

std::string format_cell(const Cell& c);
void write_csv(std::ostream& os, const Table& t, const Provenance& prov = {});
nlohmann::json to_json(const Table& t, const Provenance& prov = {});

// Samples and events merged in time order, with is_event / event_id columns.
template <std::size_t N>
Table trajectory_table(const Trajectory<N>& tr, const std::vector<std::string>& names) {
  Table t;
  t.columns.push_back("t");
  for (const auto& n : names) t.columns.push_back(n);
  t.columns.push_back("is_event");
  t.columns.push_back("event_id");
  const double sgn = tr.t.size() > 1 && tr.t.back() < tr.t.front() ? -1.0 : 1.0;
  std::size_t k = 0, e = 0;
  auto row = [&](double time, const Vec<N>& s, bool is_event, long long id) {
    std::vector<Cell> r{time};
    for (double v : s) r.emplace_back(v);
    r.emplace_back(static_cast<long long>(is_event));
    r.emplace_back(id);
    t.rows.push_back(std::move(r));
  };
  while (k < tr.t.size() || e < tr.events.size()) {
    const bool take_event =
        e < tr.events.size() && (k >= tr.t.size() || sgn * tr.events[e].t <= sgn * tr.t[k]);
    if (take_event) {
      row(tr.events[e].t, tr.events[e].state, true, tr.events[e].id);
      ++e;
    } else {
      row(tr.t[k], tr.y[k], false, -1);
      ++k;
    }
  }
  return t;
}

}  // namespace cusp
