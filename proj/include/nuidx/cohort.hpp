#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nuidx/csv.hpp"
#include "nuidx/error.hpp"
#include "nuidx/matrix.hpp"

namespace nuidx {

/// Stratum labels formed by cross-classifying one or more categorical columns.
struct Strata {
  std::vector<std::string> columns;               // e.g. {"z_age", "z_sex"}
  std::vector<std::vector<std::string>> values;   // n rows x columns.size()
  std::vector<int> label;                         // 0..n_levels-1, first-seen order
  int n_levels = 0;
};

/// Assign integer labels to the distinct value tuples in `values`.
inline void relabel(Strata& s) {
  std::map<std::vector<std::string>, int> seen;
  s.label.assign(s.values.size(), 0);
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    auto [it, inserted] = seen.emplace(s.values[i], static_cast<int>(seen.size()));
    s.label[i] = it->second;
  }
  s.n_levels = static_cast<int>(seen.size());
}

/**
 * A simulated or ingested study population.
 *
 * `y_latent` holds the simulation truth and is absent for real data.
 * Invariant: y_latent[i] == 1 implies a[i] == 1.
 */
struct Cohort {
  std::vector<std::int64_t> ids;
  std::vector<std::uint8_t> a;
  BinaryMatrix x;
  std::vector<std::string> feature_names;
  std::optional<Strata> strata;
  std::optional<std::vector<std::uint8_t>> y_latent;

  std::size_t n() const { return a.size(); }
  std::size_t k() const { return x.cols(); }

  void check() const {
    if (ids.size() != a.size() || x.rows() != a.size() || feature_names.size() != x.cols())
      throw data_error("cohort dimensions are inconsistent");
    if (strata && strata->label.size() != a.size())
      throw data_error("stratum labels do not match cohort size");
    if (y_latent) {
      if (y_latent->size() != a.size()) throw data_error("latent labels do not match cohort size");
      for (std::size_t i = 0; i < a.size(); ++i)
        if ((*y_latent)[i] && !a[i])
          throw data_error("latent positive without infection at row " + std::to_string(i));
    }
  }

  /// Sub-cohort with the given rows, in order.
  Cohort subset(std::span<const std::size_t> rows) const {
    Cohort c;
    c.ids = select<std::int64_t>(ids, rows);
    c.a = select<std::uint8_t>(a, rows);
    c.x = x.select_rows(rows);
    c.feature_names = feature_names;
    if (strata) {
      Strata s;
      s.columns = strata->columns;
      for (auto r : rows) s.values.push_back(strata->values[r]);
      relabel(s);
      c.strata = std::move(s);
    }
    if (y_latent) c.y_latent = select<std::uint8_t>(*y_latent, rows);
    return c;
  }
};

namespace detail {
inline std::uint8_t parse_binary(const std::string& v, std::size_t row, const std::string& col) {
  if (v == "0") return 0;
  if (v == "1") return 1;
  throw data_error("row " + std::to_string(row) + ", column '" + col + "': expected 0 or 1, got '" +
                   v + "'");
}
}  // namespace detail

/**
 * Read a cohort CSV. Required: header row, an `infected` column and at least
 * one `x_`-prefixed feature column. Optional: `id` (defaults to 1..n),
 * `z_`-prefixed stratum columns (cross-classified into one label), and
 * `y_latent`. Unrecognised columns are ignored. Row numbers in errors are
 * 1-based data rows.
 */
inline Cohort read_cohort_csv(const std::string& path) {
  const auto t = csv::read(path);
  if (t.rows.empty()) throw data_error(path + ": no data rows");
  const int c_inf = t.column("infected");
  if (c_inf < 0) throw data_error(path + ": missing column 'infected'");
  const int c_id = t.column("id");
  const int c_y = t.column("y_latent");
  std::vector<int> xcols, zcols;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j].rfind("x_", 0) == 0) xcols.push_back(static_cast<int>(j));
    if (t.header[j].rfind("z_", 0) == 0) zcols.push_back(static_cast<int>(j));
  }
  if (xcols.empty()) throw data_error(path + ": no feature columns (prefix 'x_')");

  const std::size_t n = t.rows.size();
  Cohort c;
  c.x = BinaryMatrix(n, xcols.size());
  for (int j : xcols) c.feature_names.push_back(t.header[j]);
  c.a.resize(n);
  c.ids.resize(n);
  if (c_y >= 0) c.y_latent.emplace(n);
  Strata s;
  for (int j : zcols) s.columns.push_back(t.header[j]);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = t.rows[i];
    const std::size_t rowno = i + 1;
    c.a[i] = detail::parse_binary(r[c_inf], rowno, "infected");
    if (c_id >= 0) {
      try {
        std::size_t used = 0;
        c.ids[i] = std::stoll(r[c_id], &used);
        if (used != r[c_id].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw data_error("row " + std::to_string(rowno) + ", column 'id': not an integer");
      }
    } else {
      c.ids[i] = static_cast<std::int64_t>(rowno);
    }
    for (std::size_t k = 0; k < xcols.size(); ++k)
      c.x(i, k) = detail::parse_binary(r[xcols[k]], rowno, t.header[xcols[k]]);
    if (c_y >= 0) (*c.y_latent)[i] = detail::parse_binary(r[c_y], rowno, "y_latent");
    if (!zcols.empty()) {
      std::vector<std::string> zv;
      for (int j : zcols) zv.push_back(r[j]);
      s.values.push_back(std::move(zv));
    }
  }
  if (!zcols.empty()) {
    relabel(s);
    c.strata = std::move(s);
  }
  c.check();
  return c;
}

/// Write `id,infected,[y_latent,]z_*...,x_*...`. The latent column is only
/// written when requested and present.
inline void write_cohort_csv(const Cohort& c, std::ostream& os, bool with_truth = false) {
  std::vector<std::string> head{"id", "infected"};
  const bool truth = with_truth && c.y_latent.has_value();
  if (truth) head.push_back("y_latent");
  if (c.strata)
    for (const auto& z : c.strata->columns) head.push_back(z);
  for (const auto& f : c.feature_names) head.push_back(f);
  csv::write_row(os, head);
  std::string line;
  for (std::size_t i = 0; i < c.n(); ++i) {
    line.clear();
    line += std::to_string(c.ids[i]);
    line += c.a[i] ? ",1" : ",0";
    if (truth) line += (*c.y_latent)[i] ? ",1" : ",0";
    if (c.strata)
      for (const auto& v : c.strata->values[i]) {
        line += ',';
        line += csv::quote(v);
      }
    for (auto v : c.x.row(i)) line += v ? ",1" : ",0";
    line += '\n';
    os << line;
  }
}

inline void write_cohort_csv(const Cohort& c, const std::string& path, bool with_truth = false) {
  std::ofstream os(path);
  if (!os) throw data_error("cannot write " + path);
  write_cohort_csv(c, os, with_truth);
}

}  // namespace nuidx
