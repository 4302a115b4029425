#pragma once

#include <map>
#include <string>
#include <vector>

#include "prospect/types.hpp"

namespace prospect {

// Optional column renames: canonical name -> column header in the file.
using ColumnMap = std::map<std::string, std::string>;

// CSV: comma delimiter, '.' decimals, LF endings, header row. Canonical
// columns id,female,non_citizen,age,married,past_income,employability,
// emp_frac_2y,ue_spells_2y; unknown columns become extras; decision and
// outcome are picked up when present. Throws SchemaError / ParseError /
// ValidationError.
Population load_population(const std::string& path, const ColumnMap& schema = {});

// Inverse of load_population; reloading gives identical records.
void save_population(const Population& pop, const std::string& path);

// Empty list iff every record satisfies the type invariants.
std::vector<Violation> validate_population(const Population& pop);

// Deterministic stratified split. Strata are (female x decision) when
// decisions are present, female alone otherwise; |train| = round(fraction*n)
// exactly via largest-remainder allocation across strata.
SplitSpec train_test_split(const Population& pop, double fraction, std::uint64_t seed);

Population subset(const Population& pop, const std::vector<int>& ids);

}  // namespace prospect
