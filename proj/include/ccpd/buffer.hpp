#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ccpd/errors.hpp"

namespace ccpd {

// Read-only view over `size()` consecutive samples of fixed dimension,
// stored row-major.
class SampleView {
public:
    SampleView() = default;
    SampleView(std::span<const double> data, std::size_t dim) : data_(data), dim_(dim) {
        if (dim_ == 0 || data_.size() % dim_ != 0) {
            throw DimensionMismatch("SampleView: data length is not a multiple of dim");
        }
    }

    std::size_t size() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> data() const noexcept { return data_; }

    std::span<const double> operator[](std::size_t i) const noexcept {
        return data_.subspan(i * dim_, dim_);
    }

    SampleView slice(std::size_t begin, std::size_t end) const {
        return SampleView(data_.subspan(begin * dim_, (end - begin) * dim_), dim_);
    }

private:
    std::span<const double> data_;
    std::size_t dim_ = 1;
};

// Append-only series of samples with a fixed dimension.
class ObservationBuffer {
public:
    explicit ObservationBuffer(std::size_t dim = 1) : dim_(dim) {
        if (dim_ == 0) throw DimensionMismatch("ObservationBuffer: dim must be positive");
    }

    // Scalar series.
    static ObservationBuffer from_scalars(std::span<const double> values) {
        ObservationBuffer buf(1);
        buf.data_.assign(values.begin(), values.end());
        return buf;
    }

    void append(std::span<const double> sample) {
        if (sample.size() != dim_) {
            throw DimensionMismatch("ObservationBuffer: sample has dimension " +
                                    std::to_string(sample.size()) + ", expected " +
                                    std::to_string(dim_));
        }
        data_.insert(data_.end(), sample.begin(), sample.end());
    }
    void append(double x) { append(std::span<const double>(&x, 1)); }

    std::size_t size() const noexcept { return data_.size() / dim_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t dim() const noexcept { return dim_; }
    std::span<const double> data() const noexcept { return data_; }

    std::span<const double> operator[](std::size_t i) const noexcept {
        return std::span<const double>(data_).subspan(i * dim_, dim_);
    }

    SampleView view() const { return SampleView(data_, dim_); }
    SampleView view(std::size_t begin, std::size_t end) const { return view().slice(begin, end); }

    bool operator==(const ObservationBuffer&) const = default;

private:
    std::size_t dim_;
    std::vector<double> data_;
};

}  // namespace ccpd
