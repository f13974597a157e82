#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace timid {

// Row-major 2-D shape; scalars are 1x1, step vectors Tx1. The batch axis is
// realized by running episodes through a shared tape, so stored tensors never
// need a third axis.
struct Shape {
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t numel() const { return rows * cols; }
    bool operator==(const Shape& o) const { return rows == o.rows && cols == o.cols; }
};

// One tape node: forward value plus a gradient buffer that backward() fills.
struct Tensor {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    int id = -1;

    double at(std::size_t r, std::size_t c) const { return value[r * shape.cols + c]; }
};

using Mask = std::vector<std::uint8_t>;  // 1 = valid entry/row, row-major

// Reverse-mode differentiation tape. Creation order is topological, so
// backward() is a single reverse sweep that visits each node exactly once.
// A tape is single-threaded; run concurrent passes on distinct tapes.
class Tape {
public:
    int input(Shape shape, std::vector<double> data);
    int scalar(double v);
    int zeros(Shape shape);

    const Tensor& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const std::vector<double>& value(int id) const { return node(id).value; }
    const std::vector<double>& grad(int id) const { return node(id).grad; }
    double scalar_value(int id) const { return node(id).value[0]; }
    int size() const { return static_cast<int>(nodes_.size()); }

    // forward primitives -----------------------------------------------------
    int matmul(int a, int b);
    int add(int a, int b);            // same shape, or b a 1xN row broadcast
    int mul(int a, int b);            // elementwise
    int scale(int a, double c);
    int add_const(int a, double c);
    int bmul(int s, int a);           // broadcast multiply by a 1x1 node
    int badd(int a, int s);           // broadcast add of a 1x1 node
    int neg(int a) { return scale(a, -1.0); }
    int transpose(int a);
    int concat_rows(const std::vector<int>& parts);
    int slice_rows(int a, std::size_t r0, std::size_t r1);
    int pick(int a, std::size_t r, std::size_t c);
    int sigmoid(int a);
    int tanh(int a);
    int exp(int a);
    int abs(int a);
    // Masked entries receive an additive -kMaskValue before the stable
    // softmax and come out exactly 0 with exactly 0 gradient.
    int row_softmax(int a, const Mask* valid = nullptr);
    int row_logsumexp(int a, const Mask* valid = nullptr);
    int layer_norm(int x, int gain, int bias, double eps = 1e-10);
    int mean_over_valid(int a, const Mask& valid_rows);    // -> 1 x cols
    int topk_mean(int a, std::size_t k, const Mask* valid = nullptr);  // -> 1x1
    int max_over_valid(int a, const Mask& valid);          // -> 1x1
    int sum_all(int a);
    // Numerically stable binary cross-entropy on a scalar logit:
    // max(s,0) - s*y + log(1+exp(-|s|)).
    int bce_with_logits(int s, double label);
    int l2_normalize_rows(int a);

    // Populates grad buffers for every node reachable from the scalar loss.
    void backward(int loss);

    static constexpr double kMaskValue = 1e30;

private:
    int push(Shape shape, std::vector<double> value, std::function<void(Tape&)> rule);
    std::vector<double>& grad_mut(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }

    std::vector<Tensor> nodes_;
    std::vector<std::function<void(Tape&)>> rules_;
};

}  // namespace timid
