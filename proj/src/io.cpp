#include "cusp/io.hpp"

#include <cmath>
#include <cstdio>

namespace cusp {

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

void write_csv(std::ostream& os, const Table& t, const Provenance& prov) {
  for (const auto& [k, v] : prov) os << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_cell(r[i]);
    os << '\n';
  }
}

nlohmann::json to_json(const Table& t, const Provenance& prov) {
  nlohmann::json j;
  j["provenance"] = nlohmann::json::object();
  for (const auto& [k, v] : prov) j["provenance"][k] = v;
  j["columns"] = t.columns;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : r) {
      if (const auto* d = std::get_if<double>(&c))
        row.push_back(std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(nullptr));
      else if (const auto* i = std::get_if<long long>(&c))
        row.push_back(*i);
      else
        row.push_back(std::get<std::string>(c));
    }
    j["rows"].push_back(std::move(row));
  }
  return j;
}

}  // namespace cusp
