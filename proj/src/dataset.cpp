#include "prospect/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "prospect/rng.hpp"

namespace prospect {

ProgramId program_from_name(const std::string& name) {
  for (int k = 0; k < kNumPrograms; ++k)
    if (name == kProgramNames[k]) return static_cast<ProgramId>(k);
  throw ParseError("unknown program name: '" + name + "'");
}

std::array<int, kNumPrograms> Population::arm_counts() const {
  std::array<int, kNumPrograms> counts{};
  if (decisions)
    for (ProgramId d : *decisions) ++counts[static_cast<int>(d)];
  return counts;
}

namespace {

const std::vector<std::string> kCoreColumns = {
    "id",           "female",       "non_citizen", "age",         "married",
    "past_income",  "employability", "emp_frac_2y", "ue_spells_2y"};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& cell, int row, const std::string& col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("row " + std::to_string(row) + ", column '" + col +
                     "': cannot parse '" + cell + "' as a number");
  return value;
}

int parse_binary(const std::string& cell, int row, const std::string& col) {
  const double v = parse_number(cell, row, col);
  if (v != 0.0 && v != 1.0)
    throw ValidationError(row, col, "row " + std::to_string(row) + ", field '" + col +
                                        "': value " + cell + " is not binary");
  return static_cast<int>(v);
}

void check_range(double v, double lo, double hi, int row, const std::string& field) {
  if (!(v >= lo && v <= hi))
    throw ValidationError(row, field,
                          "row " + std::to_string(row) + ", field '" + field + "': value " +
                              std::to_string(v) + " outside [" + std::to_string(lo) + "," +
                              std::to_string(hi) + "]");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Population load_population(const std::string& path, const ColumnMap& schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) throw SchemaError("empty dataset file: " + path);
  const std::vector<std::string> header = split_line(header_line);

  auto file_name = [&](const std::string& canonical) {
    auto it = schema.find(canonical);
    return it == schema.end() ? canonical : it->second;
  };
  auto find_col = [&](const std::string& canonical) -> int {
    const std::string want = file_name(canonical);
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == want) return static_cast<int>(j);
    return -1;
  };

  std::map<std::string, int> core_cols;
  for (const auto& name : kCoreColumns) {
    const int j = find_col(name);
    if (j < 0 && name != "id")
      throw SchemaError("missing required column '" + file_name(name) + "'");
    if (j >= 0) core_cols[name] = j;
  }
  const int decision_col = find_col("decision");
  const int outcome_col = find_col("outcome");

  std::set<int> taken;
  for (auto& [name, j] : core_cols) taken.insert(j);
  if (decision_col >= 0) taken.insert(decision_col);
  if (outcome_col >= 0) taken.insert(outcome_col);

  Population pop;
  std::vector<int> extra_cols;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (!taken.count(static_cast<int>(j))) {
      extra_cols.push_back(static_cast<int>(j));
      pop.extra_names.push_back(header[j]);
    }

  std::vector<ProgramId> decisions;
  std::vector<int> outcomes;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    auto cell = [&](const std::string& name) -> const std::string& {
      return cells[core_cols.at(name)];
    };

    IndividualRecord r;
    r.id = row;  // ids are positional regardless of any id column
    r.female = parse_binary(cell("female"), row, "female") != 0;
    r.non_citizen = parse_binary(cell("non_citizen"), row, "non_citizen") != 0;
    r.age = parse_number(cell("age"), row, "age");
    check_range(r.age, 24.0, 55.0, row, "age");
    r.married = parse_binary(cell("married"), row, "married") != 0;
    r.past_income = parse_number(cell("past_income"), row, "past_income");
    if (r.past_income < 0)
      throw ValidationError(row, "past_income", "row " + std::to_string(row) +
                                                    ", field 'past_income': negative income");
    const double empl = parse_number(cell("employability"), row, "employability");
    if (empl != 1.0 && empl != 2.0 && empl != 3.0)
      throw ValidationError(row, "employability",
                            "row " + std::to_string(row) +
                                ", field 'employability': value must be in {1,2,3}");
    r.employability = static_cast<int>(empl);
    r.emp_frac_2y = parse_number(cell("emp_frac_2y"), row, "emp_frac_2y");
    check_range(r.emp_frac_2y, 0.0, 1.0, row, "emp_frac_2y");
    r.ue_spells_2y = parse_number(cell("ue_spells_2y"), row, "ue_spells_2y");
    if (r.ue_spells_2y < 0)
      throw ValidationError(row, "ue_spells_2y",
                            "row " + std::to_string(row) + ", field 'ue_spells_2y': negative count");
    for (int j : extra_cols) {
      const double v = parse_number(cells[j], row, header[j]);
      if (!std::isfinite(v))
        throw ValidationError(row, header[j],
                              "row " + std::to_string(row) + ", field '" + header[j] +
                                  "': non-finite value");
      r.extras.push_back(v);
    }
    pop.records.push_back(std::move(r));

    if (decision_col >= 0) decisions.push_back(program_from_name(cells[decision_col]));
    if (outcome_col >= 0) outcomes.push_back(parse_binary(cells[outcome_col], row, "outcome"));
    ++row;
  }
  if (decision_col >= 0) pop.decisions = std::move(decisions);
  if (outcome_col >= 0) pop.outcomes = std::move(outcomes);
  return pop;
}

void save_population(const Population& pop, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset file: " + path);
  out << "id,female,non_citizen,age,married,past_income,employability,emp_frac_2y,ue_spells_2y";
  for (const auto& name : pop.extra_names) out << ',' << name;
  if (pop.decisions) out << ",decision";
  if (pop.outcomes) out << ",outcome";
  out << '\n';
  for (int i = 0; i < pop.size(); ++i) {
    const auto& r = pop.records[i];
    out << r.id << ',' << (r.female ? 1 : 0) << ',' << (r.non_citizen ? 1 : 0) << ','
        << format_double(r.age) << ',' << (r.married ? 1 : 0) << ','
        << format_double(r.past_income) << ',' << r.employability << ','
        << format_double(r.emp_frac_2y) << ',' << format_double(r.ue_spells_2y);
    for (double v : r.extras) out << ',' << format_double(v);
    if (pop.decisions) out << ',' << program_name((*pop.decisions)[i]);
    if (pop.outcomes) out << ',' << (*pop.outcomes)[i];
    out << '\n';
  }
}

std::vector<Violation> validate_population(const Population& pop) {
  std::vector<Violation> out;
  auto add = [&](int row, const char* field, std::string reason) {
    out.push_back({row, field, std::move(reason)});
  };
  for (int i = 0; i < pop.size(); ++i) {
    const auto& r = pop.records[i];
    if (!(r.age >= 24.0 && r.age <= 55.0)) add(i, "age", "outside [24,55]");
    if (!(r.emp_frac_2y >= 0.0 && r.emp_frac_2y <= 1.0)) add(i, "emp_frac_2y", "outside [0,1]");
    if (!(r.past_income >= 0.0) || !std::isfinite(r.past_income))
      add(i, "past_income", "negative or non-finite");
    if (r.employability < 1 || r.employability > 3) add(i, "employability", "not in {1,2,3}");
    if (!(r.ue_spells_2y >= 0.0) || !std::isfinite(r.ue_spells_2y))
      add(i, "ue_spells_2y", "negative or non-finite");
    if (!std::isfinite(r.age)) add(i, "age", "non-finite");
    for (std::size_t j = 0; j < r.extras.size(); ++j)
      if (!std::isfinite(r.extras[j]))
        add(i, pop.extra_names.size() > j ? pop.extra_names[j].c_str() : "extra", "non-finite");
  }
  if (pop.decisions && static_cast<int>(pop.decisions->size()) != pop.size())
    add(-1, "decisions", "length differs from records");
  if (pop.outcomes) {
    if (static_cast<int>(pop.outcomes->size()) != pop.size())
      add(-1, "outcomes", "length differs from records");
    for (std::size_t i = 0; i < pop.outcomes->size(); ++i)
      if ((*pop.outcomes)[i] != 0 && (*pop.outcomes)[i] != 1)
        add(static_cast<int>(i), "outcome", "not binary");
  }
  return out;
}

SplitSpec train_test_split(const Population& pop, double fraction, std::uint64_t seed) {
  const int n = pop.size();
  if (n < 2) throw Error("train_test_split needs at least 2 records");
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("split fraction must be in (0,1)");

  // Strata: (female x decision) when decisions exist, else female alone.
  std::map<int, std::vector<int>> strata;
  for (int i = 0; i < n; ++i) {
    int key = pop.records[i].female ? 1 : 0;
    if (pop.decisions) key = key * kNumPrograms + static_cast<int>((*pop.decisions)[i]);
    strata[key].push_back(i);
  }

  const int train_total = static_cast<int>(std::llround(fraction * n));

  // Largest-remainder quotas make the stratum sums hit train_total exactly.
  struct Stratum {
    int key;
    std::vector<int>* ids;
    int quota;
    double remainder;
  };
  std::vector<Stratum> items;
  int base_sum = 0;
  for (auto& [key, ids] : strata) {
    const double exact = fraction * static_cast<double>(ids.size());
    const int q = static_cast<int>(std::floor(exact));
    items.push_back({key, &ids, q, exact - q});
    base_sum += q;
  }
  int leftover = train_total - base_sum;
  std::stable_sort(items.begin(), items.end(), [](const Stratum& a, const Stratum& b) {
    if (a.remainder != b.remainder) return a.remainder > b.remainder;
    return a.key < b.key;
  });
  for (auto& s : items) {
    if (leftover > 0 && s.quota < static_cast<int>(s.ids->size())) {
      ++s.quota;
      --leftover;
    }
  }
  // Degenerate fractions can still leave a few unassigned; sweep them up.
  for (auto& s : items) {
    while (leftover > 0 && s.quota < static_cast<int>(s.ids->size())) {
      ++s.quota;
      --leftover;
    }
    while (leftover < 0 && s.quota > 0) {
      --s.quota;
      ++leftover;
    }
  }

  Rng rng = Rng(seed).substream(0x73706c69ULL);  // split stream
  SplitSpec spec;
  for (auto& s : items) {
    std::vector<int> ids = *s.ids;
    rng.substream(static_cast<std::uint64_t>(s.key)).shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i)
      (static_cast<int>(i) < s.quota ? spec.train_ids : spec.test_ids).push_back(ids[i]);
  }
  std::sort(spec.train_ids.begin(), spec.train_ids.end());
  std::sort(spec.test_ids.begin(), spec.test_ids.end());
  return spec;
}

Population subset(const Population& pop, const std::vector<int>& ids) {
  Population out;
  out.extra_names = pop.extra_names;
  out.records.reserve(ids.size());
  std::vector<ProgramId> decisions;
  std::vector<int> outcomes;
  for (int i : ids) {
    out.records.push_back(pop.records[i]);
    if (pop.decisions) decisions.push_back((*pop.decisions)[i]);
    if (pop.outcomes) outcomes.push_back((*pop.outcomes)[i]);
  }
  if (pop.decisions) out.decisions = std::move(decisions);
  if (pop.outcomes) out.outcomes = std::move(outcomes);
  return out;
}

}  // namespace prospect
