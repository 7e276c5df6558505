#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aqua/raster.hpp"
#include "aqua/rng.hpp"

namespace aqua {

// Dense NCHW tensor. Small by design: the networks here are trained from
// scratch on modest rasters, so a flat vector with explicit indexing beats
// pulling in a tensor library.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    Tensor(int n, int c, int h, int w)
        : n_(n), c_(c), h_(h), w_(w), v_(size_t(n) * c * h * w, T(0)) {
        if (n < 1 || c < 1 || h < 1 || w < 1)
            throw std::invalid_argument("tensor dimensions must be positive");
    }

    int n() const { return n_; }
    int c() const { return c_; }
    int h() const { return h_; }
    int w() const { return w_; }
    size_t size() const { return v_.size(); }
    bool same_shape(const Tensor& o) const {
        return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
    }

    T& operator()(int n, int c, int y, int x) {
        return v_[((size_t(n) * c_ + c) * h_ + y) * w_ + x];
    }
    T operator()(int n, int c, int y, int x) const {
        return v_[((size_t(n) * c_ + c) * h_ + y) * w_ + x];
    }

    T* plane(int n, int c) { return v_.data() + (size_t(n) * c_ + c) * h_ * w_; }
    const T* plane(int n, int c) const { return v_.data() + (size_t(n) * c_ + c) * h_ * w_; }

    std::vector<T>& data() { return v_; }
    const std::vector<T>& data() const { return v_; }

private:
    int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
    std::vector<T> v_;
};

// One convolution: weights [out_ch][in_ch][k][k] plus a bias per output
// channel. Padding follows the "same" convention where even kernels pad one
// less on the top/left than on the bottom/right.
template <typename T>
struct ConvParam {
    int in_ch = 0, out_ch = 0, k = 0;
    std::vector<T> w;
    std::vector<T> b;

    ConvParam() = default;
    ConvParam(int in, int out, int kernel)
        : in_ch(in), out_ch(out), k(kernel),
          w(size_t(out) * in * kernel * kernel, T(0)), b(size_t(out), T(0)) {}

    T& wat(int oc, int ic, int ky, int kx) {
        return w[((size_t(oc) * in_ch + ic) * k + ky) * k + kx];
    }
    T wat(int oc, int ic, int ky, int kx) const {
        return w[((size_t(oc) * in_ch + ic) * k + ky) * k + kx];
    }

    // He-uniform over fan-in, biases zero.
    void init_he(Rng& rng) {
        const double limit = std::sqrt(6.0 / (double(in_ch) * k * k));
        for (auto& v : w) v = T(rng.uniform(-limit, limit));
        for (auto& v : b) v = T(0);
    }
};

template <typename T>
Tensor<T> conv_same(const ConvParam<T>& p, const Tensor<T>& x) {
    if (x.c() != p.in_ch) throw std::invalid_argument("conv input channel mismatch");
    const int H = x.h(), W = x.w();
    const int pt = (p.k - 1) / 2, pl = pt;
    Tensor<T> out(x.n(), p.out_ch, H, W);
    for (int n = 0; n < x.n(); ++n) {
        for (int oc = 0; oc < p.out_ch; ++oc) {
            T* dst0 = out.plane(n, oc);
            const T bias = p.b[size_t(oc)];
            for (int i = 0; i < H * W; ++i) dst0[i] = bias;
            for (int ic = 0; ic < p.in_ch; ++ic) {
                const T* src0 = x.plane(n, ic);
                for (int ky = 0; ky < p.k; ++ky) {
                    const int y0 = std::max(0, pt - ky), y1 = std::min(H, H + pt - ky);
                    for (int kx = 0; kx < p.k; ++kx) {
                        const T wv = p.wat(oc, ic, ky, kx);
                        const int x0 = std::max(0, pl - kx), x1 = std::min(W, W + pl - kx);
                        for (int y = y0; y < y1; ++y) {
                            const T* src = src0 + size_t(y + ky - pt) * W + (x0 + kx - pl);
                            T* dst = dst0 + size_t(y) * W + x0;
                            for (int i = 0; i < x1 - x0; ++i) dst[i] += wv * src[i];
                        }
                    }
                }
            }
        }
    }
    return out;
}

// Accumulates parameter gradients into `grad` and returns the input gradient.
template <typename T>
Tensor<T> conv_same_backward(const ConvParam<T>& p, const Tensor<T>& x, const Tensor<T>& gy,
                             ConvParam<T>& grad) {
    const int H = x.h(), W = x.w();
    const int pt = (p.k - 1) / 2, pl = pt;
    Tensor<T> gx(x.n(), x.c(), H, W);
    for (int n = 0; n < x.n(); ++n) {
        for (int oc = 0; oc < p.out_ch; ++oc) {
            const T* gy0 = gy.plane(n, oc);
            T bsum = T(0);
            for (int i = 0; i < H * W; ++i) bsum += gy0[i];
            grad.b[size_t(oc)] += bsum;
            for (int ic = 0; ic < p.in_ch; ++ic) {
                const T* src0 = x.plane(n, ic);
                T* gx0 = gx.plane(n, ic);
                for (int ky = 0; ky < p.k; ++ky) {
                    const int y0 = std::max(0, pt - ky), y1 = std::min(H, H + pt - ky);
                    for (int kx = 0; kx < p.k; ++kx) {
                        const T wv = p.wat(oc, ic, ky, kx);
                        const int x0 = std::max(0, pl - kx), x1 = std::min(W, W + pl - kx);
                        T wsum = T(0);
                        for (int y = y0; y < y1; ++y) {
                            const T* src = src0 + size_t(y + ky - pt) * W + (x0 + kx - pl);
                            T* gxp = gx0 + size_t(y + ky - pt) * W + (x0 + kx - pl);
                            const T* g = gy0 + size_t(y) * W + x0;
                            for (int i = 0; i < x1 - x0; ++i) {
                                wsum += g[i] * src[i];
                                gxp[i] += wv * g[i];
                            }
                        }
                        grad.wat(oc, ic, ky, kx) += wsum;
                    }
                }
            }
        }
    }
    return gx;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    Tensor<T> out = x;
    for (auto& v : out.data()) v = v > T(0) ? v : T(0);
    return out;
}

// Gradient gated by the stored activation, so exact zeros block flow.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& activation, const Tensor<T>& gy) {
    Tensor<T> gx = gy;
    for (size_t i = 0; i < gx.size(); ++i)
        if (!(activation.data()[i] > T(0))) gx.data()[i] = T(0);
    return gx;
}

// 2x2 max pooling, stride 2. `idx` records which of the four inputs won
// (0..3, first maximum in row-major scan order wins ties).
template <typename T>
Tensor<T> maxpool2(const Tensor<T>& x, std::vector<uint8_t>& idx) {
    if (x.h() % 2 != 0 || x.w() % 2 != 0)
        throw std::invalid_argument("maxpool input must have even height and width");
    Tensor<T> out(x.n(), x.c(), x.h() / 2, x.w() / 2);
    idx.assign(out.size(), 0);
    size_t o = 0;
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c)
            for (int y = 0; y < out.h(); ++y)
                for (int xx = 0; xx < out.w(); ++xx, ++o) {
                    T best = x(n, c, 2 * y, 2 * xx);
                    uint8_t code = 0;
                    for (int d = 1; d < 4; ++d) {
                        const T v = x(n, c, 2 * y + d / 2, 2 * xx + d % 2);
                        if (v > best) {
                            best = v;
                            code = uint8_t(d);
                        }
                    }
                    out.data()[o] = best;
                    idx[o] = code;
                }
    return out;
}

template <typename T>
Tensor<T> maxpool2_backward(const Tensor<T>& x, const std::vector<uint8_t>& idx,
                            const Tensor<T>& gy) {
    Tensor<T> gx(x.n(), x.c(), x.h(), x.w());
    size_t o = 0;
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c)
            for (int y = 0; y < gy.h(); ++y)
                for (int xx = 0; xx < gy.w(); ++xx, ++o) {
                    const int d = idx[o];
                    gx(n, c, 2 * y + d / 2, 2 * xx + d % 2) += gy.data()[o];
                }
    return gx;
}

template <typename T>
Tensor<T> upsample2_nearest(const Tensor<T>& x) {
    Tensor<T> out(x.n(), x.c(), x.h() * 2, x.w() * 2);
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c)
            for (int y = 0; y < x.h(); ++y)
                for (int xx = 0; xx < x.w(); ++xx) {
                    const T v = x(n, c, y, xx);
                    out(n, c, 2 * y, 2 * xx) = v;
                    out(n, c, 2 * y, 2 * xx + 1) = v;
                    out(n, c, 2 * y + 1, 2 * xx) = v;
                    out(n, c, 2 * y + 1, 2 * xx + 1) = v;
                }
    return out;
}

template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& gy) {
    Tensor<T> gx(gy.n(), gy.c(), gy.h() / 2, gy.w() / 2);
    for (int n = 0; n < gy.n(); ++n)
        for (int c = 0; c < gy.c(); ++c)
            for (int y = 0; y < gx.h(); ++y)
                for (int xx = 0; xx < gx.w(); ++xx)
                    gx(n, c, y, xx) = gy(n, c, 2 * y, 2 * xx) + gy(n, c, 2 * y, 2 * xx + 1) +
                                      gy(n, c, 2 * y + 1, 2 * xx) +
                                      gy(n, c, 2 * y + 1, 2 * xx + 1);
    return gx;
}

// Channel concatenation [a; b].
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
        throw std::invalid_argument("concat shapes differ outside the channel axis");
    Tensor<T> out(a.n(), a.c() + b.c(), a.h(), a.w());
    for (int n = 0; n < a.n(); ++n) {
        for (int c = 0; c < a.c(); ++c)
            std::copy(a.plane(n, c), a.plane(n, c) + size_t(a.h()) * a.w(), out.plane(n, c));
        for (int c = 0; c < b.c(); ++c)
            std::copy(b.plane(n, c), b.plane(n, c) + size_t(b.h()) * b.w(),
                      out.plane(n, a.c() + c));
    }
    return out;
}

template <typename T>
void split_channels(const Tensor<T>& g, int c_first, Tensor<T>& ga, Tensor<T>& gb) {
    ga = Tensor<T>(g.n(), c_first, g.h(), g.w());
    gb = Tensor<T>(g.n(), g.c() - c_first, g.h(), g.w());
    for (int n = 0; n < g.n(); ++n) {
        for (int c = 0; c < c_first; ++c)
            std::copy(g.plane(n, c), g.plane(n, c) + size_t(g.h()) * g.w(), ga.plane(n, c));
        for (int c = c_first; c < g.c(); ++c)
            std::copy(g.plane(n, c), g.plane(n, c) + size_t(g.h()) * g.w(),
                      gb.plane(n, c - c_first));
    }
}

// Logistic with the input clamped to +-15 so float32 outputs stay strictly
// inside (0,1); sigmoid(15) is about 1 - 3.1e-7, still representable below 1.
template <typename T>
T sigmoid_scalar(T z) {
    const T c = std::max(T(-15), std::min(T(15), z));
    return T(1) / (T(1) + std::exp(-c));
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& z) {
    Tensor<T> out = z;
    for (auto& v : out.data()) v = sigmoid_scalar(v);
    return out;
}

struct UNetConfig {
    int in_channels = 2;
    int out_channels = 1;
    int depth = 4;        // number of pooling levels
    int base_filters = 64;
    int input_size = 256;  // training tile edge
    uint64_t seed = 0;

    int channels_at(int level) const { return base_filters << level; }

    void check() const {
        if (in_channels < 1 || out_channels < 1 || depth < 1 || base_filters < 1 ||
            input_size < 1)
            throw std::invalid_argument("network configuration values must be positive");
        if (input_size % (1 << depth) != 0)
            throw std::invalid_argument("input size must be divisible by 2^depth");
    }

    bool operator==(const UNetConfig& o) const {
        return in_channels == o.in_channels && out_channels == o.out_channels &&
               depth == o.depth && base_filters == o.base_filters && input_size == o.input_size;
    }
};

// Two 3x3 convolutions, each followed by ReLU.
template <typename T>
struct ConvBlock {
    ConvParam<T> c1, c2;
};

// Nearest-neighbour 2x upsample, a 2x2 convolution + ReLU, skip concat, then
// a regular conv block.
template <typename T>
struct DecoderBlock {
    ConvParam<T> up;
    ConvBlock<T> block;
};

// A named view over one parameter vector, used to walk the network in a
// fixed topological order for the optimizer, serialization and tests.
template <typename T>
struct ParamRef {
    std::string name;
    std::vector<T>* data;
    std::vector<uint32_t> dims;
};

template <typename T>
struct UNetCache {
    std::vector<Tensor<T>> enc_in, enc_a1, enc_a2, pool_out;
    std::vector<std::vector<uint8_t>> pool_idx;
    Tensor<T> mid_a1, mid_a2;
    std::vector<Tensor<T>> dec_up, dec_up_act, dec_cat, dec_a1, dec_a2;
    Tensor<T> logits, prob;
};

// Encoder-decoder segmentation network. Constructing one allocates zeroed
// parameters; call init(rng) or load weights before using it for inference.
template <typename T>
class UNet {
public:
    UNet() = default;

    explicit UNet(const UNetConfig& cfg) : cfg_(cfg) {
        cfg_.check();
        int ch = cfg_.in_channels;
        for (int level = 0; level < cfg_.depth; ++level) {
            const int f = cfg_.channels_at(level);
            enc_.push_back({ConvParam<T>(ch, f, 3), ConvParam<T>(f, f, 3)});
            ch = f;
        }
        const int fmid = cfg_.channels_at(cfg_.depth);
        mid_ = {ConvParam<T>(ch, fmid, 3), ConvParam<T>(fmid, fmid, 3)};
        int above = fmid;
        for (int level = cfg_.depth - 1; level >= 0; --level) {
            const int f = cfg_.channels_at(level);
            DecoderBlock<T> d;
            d.up = ConvParam<T>(above, f, 2);
            // The block sees the skip connection stacked with the upsampled path.
            d.block = {ConvParam<T>(2 * f, f, 3), ConvParam<T>(f, f, 3)};
            dec_.push_back(std::move(d));
            above = f;
        }
        out_ = ConvParam<T>(above, cfg_.out_channels, 1);
    }

    static UNet he_init(const UNetConfig& cfg) {
        UNet net(cfg);
        Rng rng(cfg.seed);
        for (auto& ref : net.params())
            if (ref.name.ends_with(".weight")) {
                // Reconstruct fan-in from the dims: [oc, ic, k, k].
                const double fan_in = double(ref.dims[1]) * ref.dims[2] * ref.dims[3];
                const double limit = std::sqrt(6.0 / fan_in);
                for (auto& v : *ref.data) v = T(rng.uniform(-limit, limit));
            }
        return net;
    }

    const UNetConfig& config() const { return cfg_; }

    Tensor<T> forward(const Tensor<T>& x) const {
        UNetCache<T> cache;
        return forward(x, cache);
    }

    Tensor<T> forward(const Tensor<T>& x, UNetCache<T>& cache) const {
        if (x.c() != cfg_.in_channels) throw std::invalid_argument("input channel mismatch");
        if (x.h() % (1 << cfg_.depth) != 0 || x.w() % (1 << cfg_.depth) != 0)
            throw std::invalid_argument("input extent must be divisible by 2^depth");
        cache = UNetCache<T>();
        Tensor<T> t = x;
        for (int level = 0; level < cfg_.depth; ++level) {
            cache.enc_in.push_back(t);
            cache.enc_a1.push_back(relu(conv_same(enc_[level].c1, t)));
            cache.enc_a2.push_back(relu(conv_same(enc_[level].c2, cache.enc_a1.back())));
            std::vector<uint8_t> idx;
            t = maxpool2(cache.enc_a2.back(), idx);
            cache.pool_out.push_back(t);
            cache.pool_idx.push_back(std::move(idx));
        }
        cache.mid_a1 = relu(conv_same(mid_.c1, t));
        cache.mid_a2 = relu(conv_same(mid_.c2, cache.mid_a1));
        t = cache.mid_a2;
        for (int j = 0; j < cfg_.depth; ++j) {
            const int level = cfg_.depth - 1 - j;
            cache.dec_up.push_back(upsample2_nearest(t));
            cache.dec_up_act.push_back(relu(conv_same(dec_[j].up, cache.dec_up.back())));
            cache.dec_cat.push_back(
                concat_channels(cache.enc_a2[size_t(level)], cache.dec_up_act.back()));
            cache.dec_a1.push_back(relu(conv_same(dec_[j].block.c1, cache.dec_cat.back())));
            cache.dec_a2.push_back(relu(conv_same(dec_[j].block.c2, cache.dec_a1.back())));
            t = cache.dec_a2.back();
        }
        cache.logits = conv_same(out_, t);
        cache.prob = sigmoid(cache.logits);
        return cache.prob;
    }

    // Accumulates into `grads`, which must share this network's layout.
    // `dprob` is the loss gradient with respect to the sigmoid output.
    void backward(const UNetCache<T>& cache, const Tensor<T>& dprob, UNet<T>& grads) const {
        Tensor<T> dlogits = dprob;
        for (size_t i = 0; i < dlogits.size(); ++i) {
            const T p = cache.prob.data()[i];
            dlogits.data()[i] *= p * (T(1) - p);
        }
        Tensor<T> dt = conv_same_backward(out_, cache.dec_a2.back(), dlogits, grads.out_);

        // Skip-connection gradients accumulate here and merge with the
        // pooling path when the encoder unwinds.
        std::vector<Tensor<T>> denc_a2(size_t(cfg_.depth));
        for (int j = cfg_.depth - 1; j >= 0; --j) {
            const int level = cfg_.depth - 1 - j;
            Tensor<T> d2 = relu_backward(cache.dec_a2[size_t(j)], dt);
            Tensor<T> da1 =
                conv_same_backward(dec_[j].block.c2, cache.dec_a1[size_t(j)], d2,
                                   grads.dec_[size_t(j)].block.c2);
            Tensor<T> d1 = relu_backward(cache.dec_a1[size_t(j)], da1);
            Tensor<T> dcat = conv_same_backward(dec_[j].block.c1, cache.dec_cat[size_t(j)], d1,
                                                grads.dec_[size_t(j)].block.c1);
            Tensor<T> dskip, dup_act;
            split_channels(dcat, cache.enc_a2[size_t(level)].c(), dskip, dup_act);
            denc_a2[size_t(level)] = std::move(dskip);
            Tensor<T> dup = relu_backward(cache.dec_up_act[size_t(j)], dup_act);
            Tensor<T> dups = conv_same_backward(dec_[j].up, cache.dec_up[size_t(j)], dup,
                                                grads.dec_[size_t(j)].up);
            dt = upsample2_backward(dups);
        }

        Tensor<T> dm2 = relu_backward(cache.mid_a2, dt);
        Tensor<T> dm1r = conv_same_backward(mid_.c2, cache.mid_a1, dm2, grads.mid_.c2);
        Tensor<T> dm1 = relu_backward(cache.mid_a1, dm1r);
        Tensor<T> dpool = conv_same_backward(mid_.c1, cache.pool_out.back(), dm1, grads.mid_.c1);

        for (int level = cfg_.depth - 1; level >= 0; --level) {
            Tensor<T> da2 = maxpool2_backward(cache.enc_a2[size_t(level)],
                                              cache.pool_idx[size_t(level)], dpool);
            for (size_t i = 0; i < da2.size(); ++i)
                da2.data()[i] += denc_a2[size_t(level)].data()[i];
            Tensor<T> d2 = relu_backward(cache.enc_a2[size_t(level)], da2);
            Tensor<T> da1 = conv_same_backward(enc_[level].c2, cache.enc_a1[size_t(level)], d2,
                                               grads.enc_[size_t(level)].c2);
            Tensor<T> d1 = relu_backward(cache.enc_a1[size_t(level)], da1);
            dpool = conv_same_backward(enc_[level].c1, cache.enc_in[size_t(level)], d1,
                                       grads.enc_[size_t(level)].c1);
        }
    }

    void zero() {
        for (auto& ref : params())
            std::fill(ref.data->begin(), ref.data->end(), T(0));
    }

    // Parameters in fixed topological order: encoders shallow to deep, the
    // bottleneck, decoders deep to shallow, then the output head.
    std::vector<ParamRef<T>> params() {
        std::vector<ParamRef<T>> out;
        auto add_conv = [&out](const std::string& prefix, ConvParam<T>& c) {
            out.push_back({prefix + ".weight", &c.w,
                           {uint32_t(c.out_ch), uint32_t(c.in_ch), uint32_t(c.k), uint32_t(c.k)}});
            out.push_back({prefix + ".bias", &c.b, {uint32_t(c.out_ch)}});
        };
        for (int i = 0; i < int(enc_.size()); ++i) {
            add_conv("enc" + std::to_string(i) + ".conv1", enc_[size_t(i)].c1);
            add_conv("enc" + std::to_string(i) + ".conv2", enc_[size_t(i)].c2);
        }
        add_conv("bottleneck.conv1", mid_.c1);
        add_conv("bottleneck.conv2", mid_.c2);
        for (int i = 0; i < int(dec_.size()); ++i) {
            add_conv("dec" + std::to_string(i) + ".up", dec_[size_t(i)].up);
            add_conv("dec" + std::to_string(i) + ".conv1", dec_[size_t(i)].block.c1);
            add_conv("dec" + std::to_string(i) + ".conv2", dec_[size_t(i)].block.c2);
        }
        add_conv("out", out_);
        return out;
    }

private:
    UNetConfig cfg_;
    std::vector<ConvBlock<T>> enc_;
    ConvBlock<T> mid_;
    std::vector<DecoderBlock<T>> dec_;
    ConvParam<T> out_;
};

// Binary cross-entropy (mean over all elements, predictions clipped to
// [1e-7, 1-1e-7]) plus soft Dice loss with smoothing 1, sums taken over the
// whole batch.
inline constexpr double kBceClip = 1e-7;
inline constexpr double kDiceSmooth = 1.0;

template <typename T>
double bce_dice_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    if (!pred.same_shape(target)) throw std::invalid_argument("loss shape mismatch");
    const size_t n = pred.size();
    double bce = 0.0, sp = 0.0, st = 0.0, spt = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double p = double(pred.data()[i]);
        const double t = double(target.data()[i]);
        const double pc = std::max(kBceClip, std::min(1.0 - kBceClip, p));
        bce -= t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc);
        sp += p;
        st += t;
        spt += p * t;
    }
    const double dice = (2.0 * spt + kDiceSmooth) / (sp + st + kDiceSmooth);
    return bce / double(n) + (1.0 - dice);
}

template <typename T>
Tensor<T> bce_dice_grad(const Tensor<T>& pred, const Tensor<T>& target) {
    if (!pred.same_shape(target)) throw std::invalid_argument("loss shape mismatch");
    const size_t n = pred.size();
    double sp = 0.0, st = 0.0, spt = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double p = double(pred.data()[i]);
        const double t = double(target.data()[i]);
        sp += p;
        st += t;
        spt += p * t;
    }
    const double denom = sp + st + kDiceSmooth;
    const double num = 2.0 * spt + kDiceSmooth;
    Tensor<T> g(pred.n(), pred.c(), pred.h(), pred.w());
    for (size_t i = 0; i < n; ++i) {
        const double p = double(pred.data()[i]);
        const double t = double(target.data()[i]);
        double d = 0.0;
        // The clip zeroes the BCE slope outside its active range.
        if (p > kBceClip && p < 1.0 - kBceClip) d += (p - t) / (p * (1.0 - p)) / double(n);
        d += -(2.0 * t * denom - num) / (denom * denom);
        g.data()[i] = T(d);
    }
    return g;
}

// Adam with bias correction; epsilon sits outside the square root.
template <typename T>
class Adam {
public:
    Adam(const UNetConfig& cfg, T lr)
        : lr_(lr), m_(cfg), v_(cfg) {}

    void update(UNet<T>& model, UNet<T>& grads) {
        ++step_;
        const double bc1 = 1.0 - std::pow(double(beta1_), double(step_));
        const double bc2 = 1.0 - std::pow(double(beta2_), double(step_));
        auto pws = model.params();
        auto gws = grads.params();
        auto mws = m_.params();
        auto vws = v_.params();
        for (size_t k = 0; k < pws.size(); ++k) {
            auto& p = *pws[k].data;
            auto& g = *gws[k].data;
            auto& m = *mws[k].data;
            auto& v = *vws[k].data;
            for (size_t i = 0; i < p.size(); ++i) {
                m[i] = beta1_ * m[i] + (T(1) - beta1_) * g[i];
                v[i] = beta2_ * v[i] + (T(1) - beta2_) * g[i] * g[i];
                const double mhat = double(m[i]) / bc1;
                const double vhat = double(v[i]) / bc2;
                p[i] = T(double(p[i]) - double(lr_) * mhat / (std::sqrt(vhat) + double(eps_)));
            }
        }
    }

    int64_t step() const { return step_; }

private:
    T lr_;
    T beta1_ = T(0.9);
    T beta2_ = T(0.999);
    T eps_ = T(1e-7);
    UNet<T> m_, v_;
    int64_t step_ = 0;
};

// Probability raster to water mask at a decision threshold; nodata carries
// through unchanged.
inline MaskRaster threshold_probability(const ProbabilityRaster& prob, double t = 0.5) {
    MaskRaster out(prob.grid(), 1, kMaskNoData);
    for (uint32_t y = 0; y < prob.height(); ++y)
        for (uint32_t x = 0; x < prob.width(); ++x) {
            const float p = prob.at(x, y);
            if (p == prob.nodata())
                out.at(x, y) = kMaskNoData;
            else
                out.at(x, y) = double(p) >= t ? 1 : 0;
        }
    return out;
}

using TensorF = Tensor<float>;
using UNetF = UNet<float>;

}  // namespace aqua
