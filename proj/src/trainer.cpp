#include "aqua/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace aqua {

namespace {

bool pair_has_nodata(const ByteRaster& image, const MaskRaster& mask, uint32_t col, uint32_t row,
                     uint32_t tile) {
    for (uint32_t y = 0; y < tile; ++y)
        for (uint32_t x = 0; x < tile; ++x) {
            if (image.at(col + x, row + y, 0) == kBackscatterNoData) return true;
            if (image.at(col + x, row + y, 1) == kBackscatterNoData) return true;
            if (mask.at(col + x, row + y) == kMaskNoData) return true;
        }
    return false;
}

template <typename T>
void flip_horizontal(Raster<T>& r) {
    for (int b = 0; b < r.bands(); ++b)
        for (uint32_t y = 0; y < r.height(); ++y)
            for (uint32_t x = 0; x < r.width() / 2; ++x)
                std::swap(r.at(x, y, b), r.at(r.width() - 1 - x, y, b));
}

template <typename T>
void flip_vertical(Raster<T>& r) {
    for (int b = 0; b < r.bands(); ++b)
        for (uint32_t y = 0; y < r.height() / 2; ++y)
            for (uint32_t x = 0; x < r.width(); ++x)
                std::swap(r.at(x, y, b), r.at(x, r.height() - 1 - y, b));
}

}  // namespace

std::vector<SamplePair> prepare_pairs(const ByteRaster& image, const MaskRaster& mask,
                                      uint32_t crop, uint32_t tile,
                                      const std::string& source_id, Date date) {
    if (image.bands() != 2)
        throw std::invalid_argument("training image must carry two polarization bands");
    if (image.grid() != mask.grid())
        throw std::invalid_argument("image and mask grids are misregistered");
    if (tile == 0 || crop % tile != 0)
        throw std::invalid_argument("crop size must be a multiple of the tile size");
    if (crop > image.width() || crop > image.height())
        throw std::invalid_argument("crop exceeds the raster extent");

    const uint32_t off_x = (image.width() - crop) / 2;
    const uint32_t off_y = (image.height() - crop) / 2;
    std::vector<SamplePair> out;
    int index = 0;
    for (uint32_t ty = 0; ty < crop / tile; ++ty) {
        for (uint32_t tx = 0; tx < crop / tile; ++tx, ++index) {
            const uint32_t col = off_x + tx * tile, row = off_y + ty * tile;
            if (pair_has_nodata(image, mask, col, row, tile)) continue;
            SamplePair p;
            p.image = aqua::crop(image, col, row, tile, tile);
            p.mask = aqua::crop(mask, col, row, tile, tile);
            p.source_id = source_id + "#" + std::to_string(index);
            p.date = date;
            out.push_back(std::move(p));
        }
    }
    return out;
}

void augment(SamplePair& p, Rng& rng) {
    if (rng.coin()) {
        flip_horizontal(p.image);
        flip_horizontal(p.mask);
    }
    if (rng.coin()) {
        flip_vertical(p.image);
        flip_vertical(p.mask);
    }
}

TensorF batch_images(const std::vector<const SamplePair*>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("empty batch");
    const uint32_t h = pairs[0]->image.height(), w = pairs[0]->image.width();
    TensorF x(int(pairs.size()), 2, int(h), int(w));
    for (size_t n = 0; n < pairs.size(); ++n) {
        const ByteRaster& img = pairs[n]->image;
        if (img.height() != h || img.width() != w)
            throw std::invalid_argument("batch tiles differ in size");
        for (int b = 0; b < 2; ++b)
            for (uint32_t y = 0; y < h; ++y)
                for (uint32_t xx = 0; xx < w; ++xx)
                    x(int(n), b, int(y), int(xx)) = float(img.at(xx, y, b)) / 255.0f;
    }
    return x;
}

TensorF batch_masks(const std::vector<const SamplePair*>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("empty batch");
    const uint32_t h = pairs[0]->mask.height(), w = pairs[0]->mask.width();
    TensorF t(int(pairs.size()), 1, int(h), int(w));
    for (size_t n = 0; n < pairs.size(); ++n)
        for (uint32_t y = 0; y < h; ++y)
            for (uint32_t xx = 0; xx < w; ++xx)
                t(int(n), 0, int(y), int(xx)) = pairs[n]->mask.at(xx, y) == 1 ? 1.0f : 0.0f;
    return t;
}

EvalStats evaluate(const UNet<float>& model, const std::vector<SamplePair>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("cannot evaluate on an empty set");
    EvalStats st;
    double loss_sum = 0.0;
    for (const SamplePair& p : pairs) {
        const std::vector<const SamplePair*> one{&p};
        const TensorF x = batch_images(one);
        const TensorF t = batch_masks(one);
        const TensorF prob = model.forward(x);
        loss_sum += bce_dice_loss(prob, t);
        for (size_t i = 0; i < prob.size(); ++i) {
            const bool pw = prob.data()[i] >= 0.5f;
            const bool tw = t.data()[i] >= 0.5f;
            if (pw && tw)
                ++st.counts.tp;
            else if (pw && !tw)
                ++st.counts.fp;
            else if (!pw && tw)
                ++st.counts.fn;
            else
                ++st.counts.tn;
        }
    }
    st.loss = loss_sum / double(pairs.size());
    const int64_t total = st.counts.total();
    st.pixel_accuracy = total > 0 ? double(st.counts.tp + st.counts.tn) / double(total) : 0.0;
    const int64_t pd = st.counts.tp + st.counts.fp;
    const int64_t rd = st.counts.tp + st.counts.fn;
    st.precision = pd > 0 ? double(st.counts.tp) / double(pd) : 0.0;
    st.recall = rd > 0 ? double(st.counts.tp) / double(rd) : 0.0;
    st.f1 = st.precision + st.recall > 0.0
                ? 2.0 * st.precision * st.recall / (st.precision + st.recall)
                : 0.0;
    return st;
}

TrainResult train(const std::vector<SamplePair>& train_pairs,
                  const std::vector<SamplePair>& val_pairs, const UNetConfig& net_cfg,
                  const TrainConfig& cfg, EpochCallback on_epoch, void* on_epoch_arg) {
    if (train_pairs.empty()) throw std::invalid_argument("no training pairs");
    if (val_pairs.empty()) throw std::invalid_argument("no validation pairs");
    if (cfg.epochs < 1 || cfg.batch_size < 1)
        throw std::invalid_argument("epochs and batch size must be positive");

    UNetConfig seeded = net_cfg;
    seeded.seed = cfg.seed;
    UNet<float> model = UNet<float>::he_init(seeded);
    UNet<float> grads(seeded);
    Adam<float> opt(seeded, float(cfg.learning_rate));
    Rng rng(cfg.seed ^ 0x5eedf00d);

    TrainResult result;
    result.best_model = model;
    result.best_epoch = 0;
    double best_accuracy = -1.0;

    std::vector<size_t> order(train_pairs.size());
    std::iota(order.begin(), order.end(), size_t(0));

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < order.size(); start += size_t(cfg.batch_size)) {
            const size_t stop = std::min(order.size(), start + size_t(cfg.batch_size));
            std::vector<SamplePair> batch_storage;
            std::vector<const SamplePair*> batch;
            batch_storage.reserve(stop - start);
            for (size_t i = start; i < stop; ++i) {
                batch_storage.push_back(train_pairs[order[i]]);
                if (cfg.augment_flips) augment(batch_storage.back(), rng);
            }
            for (const SamplePair& p : batch_storage) batch.push_back(&p);

            const TensorF x = batch_images(batch);
            const TensorF t = batch_masks(batch);
            UNetCache<float> cache;
            const TensorF prob = model.forward(x, cache);
            loss_sum += bce_dice_loss(prob, t) * double(batch.size());
            seen += batch.size();
            const TensorF dprob = bce_dice_grad(prob, t);
            grads.zero();
            model.backward(cache, dprob, grads);
            opt.update(model, grads);
        }

        const EvalStats val = evaluate(model, val_pairs);
        EpochStats es;
        es.epoch = epoch;
        es.train_loss = loss_sum / double(seen);
        es.val_loss = val.loss;
        es.val_accuracy = val.pixel_accuracy;
        es.val_f1 = val.f1;
        result.history.push_back(es);
        if (on_epoch) on_epoch(es, on_epoch_arg);

        if (val.pixel_accuracy > best_accuracy) {
            best_accuracy = val.pixel_accuracy;
            result.best_model = model;
            result.best_epoch = epoch;
        }
    }
    return result;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "epoch,train_loss,val_loss,val_accuracy,val_f1\n";
    char buf[160];
    for (const EpochStats& e : history) {
        std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f\n", e.epoch, e.train_loss,
                      e.val_loss, e.val_accuracy, e.val_f1);
        out << buf;
    }
    if (!out) throw std::runtime_error("cannot write " + path);
}

}  // namespace aqua
