#include "prospect/features.hpp"

#include <cmath>

namespace prospect {

FeatureMatrix build_features(const Population& pop, FeatureSet set) {
  FeatureMatrix fm;
  fm.names = {"female", "non_citizen", "age", "married", "log_income", "emp_frac_2y",
              "ue_spells_2y"};
  if (set == FeatureSet::causal) {
    fm.names.push_back("employability");
    fm.names.push_back("female_married");
  }
  for (const auto& name : pop.extra_names) fm.names.push_back(name);

  const int n = pop.size();
  const int p = static_cast<int>(fm.names.size());
  fm.values.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const auto& r = pop.records[i];
    int j = 0;
    fm.values(i, j++) = r.female ? 1.0 : 0.0;
    fm.values(i, j++) = r.non_citizen ? 1.0 : 0.0;
    fm.values(i, j++) = r.age;
    fm.values(i, j++) = r.married ? 1.0 : 0.0;
    fm.values(i, j++) = std::log1p(r.past_income);
    fm.values(i, j++) = r.emp_frac_2y;
    fm.values(i, j++) = r.ue_spells_2y;
    if (set == FeatureSet::causal) {
      fm.values(i, j++) = static_cast<double>(r.employability);
      fm.values(i, j++) = (r.female && r.married) ? 1.0 : 0.0;
    }
    for (double v : r.extras) fm.values(i, j++) = v;
  }
  return fm;
}

}  // namespace prospect
