#ifndef XLTAG_TAG_DISTRIBUTION_H_
#define XLTAG_TAG_DISTRIBUTION_H_

#include <span>
#include <vector>

namespace xltag {

// Probability vector over the labels of a TagSet for one token.
using TagDistribution = std::vector<double>;

// Index of the largest entry; ties go to the lowest index.
inline int argmax(std::span<const double> values) {
  int best = 0;
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

// Entries nonnegative and summing to 1 within |tolerance|.
bool is_distribution(std::span<const double> values, double tolerance = 1e-9);

}  // namespace xltag

#endif  // XLTAG_TAG_DISTRIBUTION_H_
