#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ssr/error.hpp"

namespace ssr {

/// Row-major 2-D grid. No value constraints; the validated image types wrap it.
template <typename T>
class Grid {
public:
    Grid() = default;
    Grid(std::size_t height, std::size_t width, T fill = T{})
        : height_(height), width_(width), values_(height * width, fill) {}
    Grid(std::size_t height, std::size_t width, std::vector<T> values)
        : height_(height), width_(width), values_(std::move(values)) {
        if (values_.size() != height_ * width_) {
            throw Error(ErrorKind::ShapeMismatch, "value count does not match height x width");
        }
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    T& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
    const T& operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }

    std::span<T> values() noexcept { return values_; }
    std::span<const T> values() const noexcept { return values_; }
    const std::vector<T>& vector() const noexcept { return values_; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept {
        return height_ == other.height() && width_ == other.width();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<T> values_;
};

using Raster = Grid<double>;
using Mask = Grid<unsigned char>;

} // namespace ssr
