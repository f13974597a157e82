#include "timid/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace timid {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

int Tape::push(Shape shape, std::vector<double> value, std::function<void(Tape&)> rule) {
    require(value.size() == shape.numel(), "tensor buffer length must equal shape product");
    Tensor t;
    t.shape = shape;
    t.value = std::move(value);
    t.id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(t));
    rules_.push_back(std::move(rule));
    return nodes_.back().id;
}

int Tape::input(Shape shape, std::vector<double> data) {
    return push(shape, std::move(data), nullptr);
}

int Tape::scalar(double v) { return input({1, 1}, {v}); }

int Tape::zeros(Shape shape) {
    return input(shape, std::vector<double>(shape.numel(), 0.0));
}

int Tape::matmul(int a, int b) {
    const Tensor& A = node(a);
    const Tensor& B = node(b);
    require(A.shape.cols == B.shape.rows, "matmul: inner dimensions differ");
    const std::size_t m = A.shape.rows, k = A.shape.cols, n = B.shape.cols;
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = A.value[i * k + p];
            if (av == 0.0) continue;
            const double* brow = &B.value[p * n];
            double* orow = &out[i * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    const int id = push({m, n}, std::move(out), nullptr);
    rules_.back() = [a, b, id, m, k, n](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        const std::vector<double>& Av = t.value(a);
        const std::vector<double>& Bv = t.value(b);
        std::vector<double>& dA = t.grad_mut(a);
        std::vector<double>& dB = t.grad_mut(b);
        // dA += dC * B^T
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double g = dC[i * n + j];
                if (g == 0.0) continue;
                const double* brow = &Bv[j];  // column j of B, stride n
                for (std::size_t p = 0; p < k; ++p) dA[i * k + p] += g * brow[p * n];
            }
        }
        // dB += A^T * dC
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t i = 0; i < m; ++i) {
                const double av = Av[i * k + p];
                if (av == 0.0) continue;
                const double* grow = &dC[i * n];
                double* brow = &dB[p * n];
                for (std::size_t j = 0; j < n; ++j) brow[j] += av * grow[j];
            }
        }
    };
    return id;
}

int Tape::add(int a, int b) {
    const Tensor& A = node(a);
    const Tensor& B = node(b);
    const bool broadcast = B.shape.rows == 1 && A.shape.cols == B.shape.cols &&
                           A.shape.rows != B.shape.rows;
    require(A.shape == B.shape || broadcast, "add: shape mismatch");
    std::vector<double> out(A.value);
    const std::size_t n = A.shape.cols;
    for (std::size_t i = 0; i < A.shape.rows; ++i) {
        const double* brow = broadcast ? B.value.data() : &B.value[i * n];
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += brow[j];
    }
    const Shape shape = A.shape;
    const int id = push(shape, std::move(out), nullptr);
    rules_.back() = [a, b, id, broadcast, shape](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        std::vector<double>& dB = t.grad_mut(b);
        for (std::size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i];
        if (broadcast) {
            for (std::size_t i = 0; i < shape.rows; ++i)
                for (std::size_t j = 0; j < shape.cols; ++j)
                    dB[j] += dC[i * shape.cols + j];
        } else {
            for (std::size_t i = 0; i < dC.size(); ++i) dB[i] += dC[i];
        }
    };
    return id;
}

int Tape::mul(int a, int b) {
    const Tensor& A = node(a);
    const Tensor& B = node(b);
    require(A.shape == B.shape, "mul: shape mismatch");
    std::vector<double> out(A.value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = A.value[i] * B.value[i];
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [a, b, id](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        const std::vector<double>& Av = t.value(a);
        const std::vector<double>& Bv = t.value(b);
        std::vector<double>& dA = t.grad_mut(a);
        std::vector<double>& dB = t.grad_mut(b);
        for (std::size_t i = 0; i < dC.size(); ++i) {
            dA[i] += dC[i] * Bv[i];
            dB[i] += dC[i] * Av[i];
        }
    };
    return id;
}

int Tape::scale(int a, double c) {
    const Tensor& A = node(a);
    std::vector<double> out(A.value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * A.value[i];
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [a, id, c](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i) dA[i] += c * dC[i];
    };
    return id;
}

int Tape::add_const(int a, double c) {
    const Tensor& A = node(a);
    std::vector<double> out(A.value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = A.value[i] + c;
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [a, id](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i];
    };
    return id;
}

int Tape::bmul(int s, int a) {
    require(node(s).shape.numel() == 1, "bmul: scalar operand must be 1x1");
    const Tensor& A = node(a);
    const double sv = node(s).value[0];
    std::vector<double> out(A.value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sv * A.value[i];
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [s, a, id](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        const std::vector<double>& Av = t.value(a);
        const double sv = t.value(s)[0];
        std::vector<double>& dA = t.grad_mut(a);
        double acc = 0.0;
        for (std::size_t i = 0; i < dC.size(); ++i) {
            dA[i] += sv * dC[i];
            acc += dC[i] * Av[i];
        }
        t.grad_mut(s)[0] += acc;
    };
    return id;
}

int Tape::badd(int a, int s) {
    require(node(s).shape.numel() == 1, "badd: scalar operand must be 1x1");
    const Tensor& A = node(a);
    const double sv = node(s).value[0];
    std::vector<double> out(A.value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = A.value[i] + sv;
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [s, a, id](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        double acc = 0.0;
        for (std::size_t i = 0; i < dC.size(); ++i) {
            dA[i] += dC[i];
            acc += dC[i];
        }
        t.grad_mut(s)[0] += acc;
    };
    return id;
}

int Tape::transpose(int a) {
    const Tensor& A = node(a);
    const std::size_t m = A.shape.rows, n = A.shape.cols;
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = A.value[i * n + j];
    const int id = push({n, m}, std::move(out), nullptr);
    rules_.back() = [a, id, m, n](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) dA[i * n + j] += dC[j * m + i];
    };
    return id;
}

int Tape::concat_rows(const std::vector<int>& parts) {
    require(!parts.empty(), "concat_rows: empty part list");
    const std::size_t cols = node(parts[0]).shape.cols;
    std::size_t rows = 0;
    for (int p : parts) {
        require(node(p).shape.cols == cols, "concat_rows: column mismatch");
        rows += node(p).shape.rows;
    }
    std::vector<double> out;
    out.reserve(rows * cols);
    for (int p : parts) {
        const auto& v = value(p);
        out.insert(out.end(), v.begin(), v.end());
    }
    const int id = push({rows, cols}, std::move(out), nullptr);
    rules_.back() = [parts, id](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        std::size_t offset = 0;
        for (int p : parts) {
            std::vector<double>& dP = t.grad_mut(p);
            for (std::size_t i = 0; i < dP.size(); ++i) dP[i] += dC[offset + i];
            offset += dP.size();
        }
    };
    return id;
}

int Tape::slice_rows(int a, std::size_t r0, std::size_t r1) {
    const Tensor& A = node(a);
    require(r0 < r1 && r1 <= A.shape.rows, "slice_rows: range out of bounds");
    const std::size_t n = A.shape.cols;
    std::vector<double> out(A.value.begin() + static_cast<std::ptrdiff_t>(r0 * n),
                            A.value.begin() + static_cast<std::ptrdiff_t>(r1 * n));
    const int id = push({r1 - r0, n}, std::move(out), nullptr);
    rules_.back() = [a, id, r0, n](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i) dA[r0 * n + i] += dC[i];
    };
    return id;
}

int Tape::pick(int a, std::size_t r, std::size_t c) {
    const Tensor& A = node(a);
    require(r < A.shape.rows && c < A.shape.cols, "pick: index out of bounds");
    const std::size_t flat = r * A.shape.cols + c;
    const int id = push({1, 1}, {A.value[flat]}, nullptr);
    rules_.back() = [a, id, flat](Tape& t) { t.grad_mut(a)[flat] += t.grad(id)[0]; };
    return id;
}

int Tape::sigmoid(int a) {
    const Tensor& A = node(a);
    std::vector<double> out(A.value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(A.value[i]);
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [a, id](Tape& t) {
        const std::vector<double>& y = t.value(id);
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i] * y[i] * (1.0 - y[i]);
    };
    return id;
}

int Tape::tanh(int a) {
    const Tensor& A = node(a);
    std::vector<double> out(A.value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(A.value[i]);
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [a, id](Tape& t) {
        const std::vector<double>& y = t.value(id);
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i] * (1.0 - y[i] * y[i]);
    };
    return id;
}

int Tape::exp(int a) {
    const Tensor& A = node(a);
    std::vector<double> out(A.value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(A.value[i]);
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [a, id](Tape& t) {
        const std::vector<double>& y = t.value(id);
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i) dA[i] += dC[i] * y[i];
    };
    return id;
}

int Tape::abs(int a) {
    const Tensor& A = node(a);
    std::vector<double> out(A.value.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(A.value[i]);
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [a, id](Tape& t) {
        const std::vector<double>& x = t.value(a);
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < dC.size(); ++i) {
            const double s = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
            dA[i] += dC[i] * s;
        }
    };
    return id;
}

int Tape::row_softmax(int a, const Mask* valid) {
    const Tensor& A = node(a);
    require(valid == nullptr || valid->size() == A.value.size(),
            "row_softmax: mask shape mismatch");
    const std::size_t m = A.shape.rows, n = A.shape.cols;
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -kMaskValue * 2.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double x = A.value[i * n + j] - (valid && !(*valid)[i * n + j] ? kMaskValue : 0.0);
            mx = std::max(mx, x);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double x = A.value[i * n + j] - (valid && !(*valid)[i * n + j] ? kMaskValue : 0.0);
            const double e = std::exp(x - mx);  // underflows to exact 0 when masked
            out[i * n + j] = e;
            denom += e;
        }
        if (denom > 0.0) {
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= denom;
        }
    }
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [a, id, m, n](Tape& t) {
        const std::vector<double>& y = t.value(id);
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += y[i * n + j] * dC[i * n + j];
            for (std::size_t j = 0; j < n; ++j)
                dA[i * n + j] += y[i * n + j] * (dC[i * n + j] - dot);
        }
    };
    return id;
}

int Tape::row_logsumexp(int a, const Mask* valid) {
    const Tensor& A = node(a);
    require(valid == nullptr || valid->size() == A.value.size(),
            "row_logsumexp: mask shape mismatch");
    const std::size_t m = A.shape.rows, n = A.shape.cols;
    std::vector<double> out(m, 0.0);
    std::vector<double> weights(m * n, 0.0);  // softmax over valid entries, for backward
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -kMaskValue * 2.0;
        bool any = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (valid && !(*valid)[i * n + j]) continue;
            mx = std::max(mx, A.value[i * n + j]);
            any = true;
        }
        if (!any) {
            out[i] = 0.0;  // inert row; no gradient flows
            continue;
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (valid && !(*valid)[i * n + j]) continue;
            const double e = std::exp(A.value[i * n + j] - mx);
            weights[i * n + j] = e;
            denom += e;
        }
        out[i] = mx + std::log(denom);
        for (std::size_t j = 0; j < n; ++j) weights[i * n + j] /= denom;
    }
    const int id = push({m, 1}, std::move(out), nullptr);
    rules_.back() = [a, id, m, n, w = std::move(weights)](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) dA[i * n + j] += dC[i] * w[i * n + j];
    };
    return id;
}

int Tape::layer_norm(int x, int gain, int bias, double eps) {
    const Tensor& X = node(x);
    const std::size_t m = X.shape.rows, n = X.shape.cols;
    require(n > 0, "layer_norm: feature width must be positive");
    require(node(gain).shape == Shape{1, n} && node(bias).shape == Shape{1, n},
            "layer_norm: gain/bias must be 1 x feature");
    std::vector<double> xhat(m * n);
    std::vector<double> inv_std(m);
    std::vector<double> out(m * n);
    const std::vector<double>& g = value(gain);
    const std::vector<double>& b = value(bias);
    for (std::size_t i = 0; i < m; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += X.value[i * n + j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = X.value[i * n + j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < n; ++j) {
            xhat[i * n + j] = (X.value[i * n + j] - mean) * inv_std[i];
            out[i * n + j] = xhat[i * n + j] * g[j] + b[j];
        }
    }
    const int id = push(X.shape, std::move(out), nullptr);
    rules_.back() = [x, gain, bias, id, m, n, xh = std::move(xhat),
                     is = std::move(inv_std)](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        const std::vector<double>& g = t.value(gain);
        std::vector<double>& dX = t.grad_mut(x);
        std::vector<double>& dG = t.grad_mut(gain);
        std::vector<double>& dB = t.grad_mut(bias);
        for (std::size_t i = 0; i < m; ++i) {
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double dxhat = dC[i * n + j] * g[j];
                mean_dxhat += dxhat;
                mean_dxhat_xhat += dxhat * xh[i * n + j];
                dG[j] += dC[i * n + j] * xh[i * n + j];
                dB[j] += dC[i * n + j];
            }
            mean_dxhat /= static_cast<double>(n);
            mean_dxhat_xhat /= static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
                const double dxhat = dC[i * n + j] * g[j];
                dX[i * n + j] +=
                    is[i] * (dxhat - mean_dxhat - xh[i * n + j] * mean_dxhat_xhat);
            }
        }
    };
    return id;
}

int Tape::mean_over_valid(int a, const Mask& valid_rows) {
    const Tensor& A = node(a);
    require(valid_rows.size() == A.shape.rows, "mean_over_valid: mask length mismatch");
    const std::size_t m = A.shape.rows, n = A.shape.cols;
    std::size_t count = 0;
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (!valid_rows[i]) continue;
        ++count;
        for (std::size_t j = 0; j < n; ++j) out[j] += A.value[i * n + j];
    }
    require(count > 0, "mean_over_valid: no valid rows");
    for (std::size_t j = 0; j < n; ++j) out[j] /= static_cast<double>(count);
    const int id = push({1, n}, std::move(out), nullptr);
    rules_.back() = [a, id, m, n, count, mask = valid_rows](Tape& t) {
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        const double inv = 1.0 / static_cast<double>(count);
        for (std::size_t i = 0; i < m; ++i) {
            if (!mask[i]) continue;
            for (std::size_t j = 0; j < n; ++j) dA[i * n + j] += dC[j] * inv;
        }
    };
    return id;
}

int Tape::topk_mean(int a, std::size_t k, const Mask* valid) {
    const Tensor& A = node(a);
    require(valid == nullptr || valid->size() == A.value.size(),
            "topk_mean: mask shape mismatch");
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < A.value.size(); ++i) {
        if (!valid || (*valid)[i]) candidates.push_back(i);
    }
    require(k >= 1 && k <= candidates.size(), "topk_mean: k out of range");
    // value descending, index ascending on ties
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t x, std::size_t y) { return A.value[x] > A.value[y]; });
    candidates.resize(k);
    double sum = 0.0;
    for (std::size_t i : candidates) sum += A.value[i];
    const int id = push({1, 1}, {sum / static_cast<double>(k)}, nullptr);
    rules_.back() = [a, id, k, sel = std::move(candidates)](Tape& t) {
        const double g = t.grad(id)[0] / static_cast<double>(k);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i : sel) dA[i] += g;
    };
    return id;
}

int Tape::max_over_valid(int a, const Mask& valid) {
    return topk_mean(a, 1, &valid);
}

int Tape::sum_all(int a) {
    const Tensor& A = node(a);
    const double s = std::accumulate(A.value.begin(), A.value.end(), 0.0);
    const int id = push({1, 1}, {s}, nullptr);
    rules_.back() = [a, id](Tape& t) {
        const double g = t.grad(id)[0];
        std::vector<double>& dA = t.grad_mut(a);
        for (double& v : dA) v += g;
    };
    return id;
}

int Tape::bce_with_logits(int s, double label) {
    require(node(s).shape.numel() == 1, "bce_with_logits: logit must be scalar");
    const double x = node(s).value[0];
    const double loss = std::max(x, 0.0) - x * label + std::log1p(std::exp(-std::fabs(x)));
    const int id = push({1, 1}, {loss}, nullptr);
    rules_.back() = [s, id, label](Tape& t) {
        const double x = t.value(s)[0];
        t.grad_mut(s)[0] += t.grad(id)[0] * (stable_sigmoid(x) - label);
    };
    return id;
}

int Tape::l2_normalize_rows(int a) {
    const Tensor& A = node(a);
    const std::size_t m = A.shape.rows, n = A.shape.cols;
    std::vector<double> out(m * n, 0.0);
    std::vector<double> norms(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double sq = 0.0;
        for (std::size_t j = 0; j < n; ++j) sq += A.value[i * n + j] * A.value[i * n + j];
        norms[i] = std::sqrt(sq);
        if (norms[i] > 0.0) {
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] = A.value[i * n + j] / norms[i];
        }
    }
    const int id = push(A.shape, std::move(out), nullptr);
    rules_.back() = [a, id, m, n, r = std::move(norms)](Tape& t) {
        const std::vector<double>& y = t.value(id);
        const std::vector<double>& dC = t.grad(id);
        std::vector<double>& dA = t.grad_mut(a);
        for (std::size_t i = 0; i < m; ++i) {
            if (r[i] == 0.0) continue;
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += y[i * n + j] * dC[i * n + j];
            for (std::size_t j = 0; j < n; ++j)
                dA[i * n + j] += (dC[i * n + j] - y[i * n + j] * dot) / r[i];
        }
    };
    return id;
}

void Tape::backward(int loss) {
    require(loss >= 0 && loss < size(), "backward: invalid node id");
    require(node(loss).shape.numel() == 1, "backward: loss must be scalar");
    for (Tensor& t : nodes_) {
        t.grad.assign(t.value.size(), 0.0);
    }
    nodes_[static_cast<std::size_t>(loss)].grad[0] = 1.0;
    for (int id = loss; id >= 0; --id) {
        if (rules_[static_cast<std::size_t>(id)]) {
            rules_[static_cast<std::size_t>(id)](*this);
        }
    }
}

}  // namespace timid
