#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bnsynth/error.hpp"

namespace bnsynth {

// Subset of variable indices as a bitmask; bit i set means variable i is in
// the set. Variables are capped at 32 so a set fits one machine word.
using VarSet = std::uint32_t;
inline constexpr int kMaxVariables = 32;

inline int set_size(VarSet s) { return std::popcount(s); }
inline bool contains(VarSet s, int i) { return (s >> i) & 1u; }

inline std::vector<int> members(VarSet s) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::popcount(s)));
  while (s) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

// An n x d matrix of binary observations with column names. Immutable once
// constructed.
class BinaryDataset {
 public:
  BinaryDataset(std::vector<std::string> names, std::vector<std::uint8_t> cells)
      : names_(std::move(names)), cells_(std::move(cells)) {
    if (names_.empty()) usage_error("dataset needs at least one column");
    if (names_.size() > static_cast<std::size_t>(kMaxVariables))
      usage_error("dataset has more than 32 columns");
    std::unordered_set<std::string> seen;
    for (const auto& name : names_) {
      if (name.empty()) usage_error("empty column name");
      if (!seen.insert(name).second) usage_error("duplicate column name \"" + name + "\"");
    }
    if (cells_.empty()) usage_error("no observations");
    if (cells_.size() % names_.size() != 0) usage_error("cell count is not a multiple of the column count");
    for (std::uint8_t v : cells_)
      if (v > 1) usage_error("dataset cell is not 0 or 1");
    fingerprint_ = compute_fingerprint();
  }

  std::size_t n() const noexcept { return cells_.size() / names_.size(); }
  int d() const noexcept { return static_cast<int>(names_.size()); }

  std::uint8_t at(std::size_t row, int col) const noexcept {
    return cells_[row * names_.size() + static_cast<std::size_t>(col)];
  }

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::uint8_t>& cells() const noexcept { return cells_; }

  // Number of ones in column `col`.
  std::size_t column_sum(int col) const {
    std::size_t s = 0;
    for (std::size_t r = 0; r < n(); ++r) s += at(r, col);
    return s;
  }

  // FNV-1a over names and cells, computed at construction.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  friend bool operator==(const BinaryDataset& a, const BinaryDataset& b) {
    return a.names_ == b.names_ && a.cells_ == b.cells_;
  }

 private:
  std::uint64_t compute_fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint8_t byte) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    };
    for (const auto& name : names_) {
      for (char c : name) mix(static_cast<std::uint8_t>(c));
      mix(0xff);
    }
    for (std::uint8_t v : cells_) mix(v);
    return h;
  }

  std::vector<std::string> names_;
  std::vector<std::uint8_t> cells_;
  std::uint64_t fingerprint_ = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Parse CSV text: mandatory header row, then rows of literal 0/1 cells.
// Rows are numbered from 1 for the first data row in error messages.
inline BinaryDataset parse_csv(std::istream& in, const std::string& source = "<input>") {
  std::string line;
  std::vector<std::string> names;
  bool have_header = false;
  std::vector<std::uint8_t> cells;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::string_view view = line;
    if (!have_header && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (detail::trim(view).empty()) continue;
    const auto fields = detail::split_commas(view);
    if (!have_header) {
      std::unordered_set<std::string_view> seen;
      for (auto f : fields) {
        if (f.empty()) io_error(source + ": empty column name in header");
        if (!seen.insert(f).second) io_error(source + ": duplicate column name \"" + std::string(f) + "\"");
        names.emplace_back(f);
      }
      if (names.size() > static_cast<std::size_t>(kMaxVariables))
        io_error(source + ": more than 32 columns");
      have_header = true;
      continue;
    }
    ++row;
    if (fields.size() != names.size())
      io_error(source + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
               " cells, expected " + std::to_string(names.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (fields[c] == "0") {
        cells.push_back(0);
      } else if (fields[c] == "1") {
        cells.push_back(1);
      } else {
        io_error(source + ": non-binary cell \"" + std::string(fields[c]) + "\" at row " +
                 std::to_string(row) + ", column \"" + names[c] + "\"");
      }
    }
  }
  if (!have_header) io_error(source + ": missing header row");
  if (row == 0) io_error(source + ": no observations");
  return BinaryDataset(std::move(names), std::move(cells));
}

inline BinaryDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_error("cannot open data file: " + path);
  return parse_csv(in, path);
}

inline std::string to_csv(const BinaryDataset& data) {
  std::string out;
  out.reserve(data.n() * static_cast<std::size_t>(data.d()) * 2 + 64);
  for (int j = 0; j < data.d(); ++j) {
    if (j) out += ',';
    out += data.names()[static_cast<std::size_t>(j)];
  }
  out += '\n';
  for (std::size_t r = 0; r < data.n(); ++r) {
    for (int j = 0; j < data.d(); ++j) {
      if (j) out += ',';
      out += static_cast<char>('0' + data.at(r, j));
    }
    out += '\n';
  }
  return out;
}

// A conditioning event: the listed variables take the listed values.
struct ParentConfig {
  std::vector<int> variables;           // strictly increasing
  std::vector<std::uint8_t> assignment;  // same length, values in {0,1}

  void validate(int d) const {
    if (variables.size() != assignment.size()) usage_error("parent configuration: assignment length mismatch");
    for (std::size_t i = 0; i < variables.size(); ++i) {
      if (variables[i] < 0 || variables[i] >= d) usage_error("parent configuration: variable index out of range");
      if (i > 0 && variables[i] <= variables[i - 1]) usage_error("parent configuration: indices must be strictly increasing");
      if (assignment[i] > 1) usage_error("parent configuration: values must be 0 or 1");
    }
  }

  bool matches(const BinaryDataset& data, std::size_t row) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (data.at(row, variables[i]) != assignment[i]) return false;
    return true;
  }

  friend bool operator==(const ParentConfig&, const ParentConfig&) = default;
};

struct ConfigCount {
  std::size_t n = 0;  // rows matching the parent configuration
  std::size_t z = 0;  // of those, rows where the node is 1

  friend bool operator==(const ConfigCount&, const ConfigCount&) = default;
};

// Counts for one (node, parent set). Configuration index: parent values in
// increasing variable order, lowest index as the least significant bit.
struct SufficientStats {
  int node = 0;
  VarSet parents = 0;
  std::vector<ConfigCount> table;
};

inline SufficientStats sufficient_stats(const BinaryDataset& data, int node, VarSet parents) {
  const int d = data.d();
  if (node < 0 || node >= d) usage_error("sufficient_stats: node index out of range");
  if (d < kMaxVariables && (parents >> d) != 0) usage_error("sufficient_stats: parent index out of range");
  if (contains(parents, node)) usage_error("sufficient_stats: node contained in its own parent set");
  const auto pa = members(parents);
  SufficientStats s{node, parents, std::vector<ConfigCount>(std::size_t{1} << pa.size())};
  for (std::size_t r = 0; r < data.n(); ++r) {
    std::size_t cfg = 0;
    for (std::size_t k = 0; k < pa.size(); ++k) cfg |= static_cast<std::size_t>(data.at(r, pa[k])) << k;
    auto& cell = s.table[cfg];
    ++cell.n;
    cell.z += data.at(r, node);
  }
  return s;
}

// (n_j, z_j) for `node` restricted to rows matching `event`.
inline ConfigCount event_counts(const BinaryDataset& data, int node, const ParentConfig& event) {
  ConfigCount c;
  for (std::size_t r = 0; r < data.n(); ++r) {
    if (!event.matches(data, r)) continue;
    ++c.n;
    c.z += data.at(r, node);
  }
  return c;
}

}  // namespace bnsynth
