#include "visrisk/matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace visrisk {

void MaskedRows::push_back(std::span<const double> values, std::span<const unsigned char> mask) {
    if (values.size() != dim_ || mask.size() != dim_) throw std::invalid_argument("row dimension mismatch");
    for (std::size_t k = 0; k < dim_; ++k) {
        values_.push_back(mask[k] ? values[k] : 0.0);
        mask_.push_back(mask[k] ? 1 : 0);
    }
}

void MaskedRows::push_back(std::span<const double> values) {
    if (values.size() != dim_) throw std::invalid_argument("row dimension mismatch");
    values_.insert(values_.end(), values.begin(), values.end());
    mask_.insert(mask_.end(), dim_, 1);
}

std::size_t MaskedRows::observed_count(std::size_t r) const {
    auto m = mask(r);
    return static_cast<std::size_t>(std::count(m.begin(), m.end(), 1));
}

}  // namespace visrisk
