#pragma once

#include <string>
#include <vector>

#include "aqua/analytics.hpp"
#include "aqua/raster.hpp"
#include "aqua/rng.hpp"
#include "aqua/unet.hpp"

namespace aqua {

// One training example: a quantized dual-pol tile and its water mask.
struct SamplePair {
    ByteRaster image;  // 2 bands, VH then VV
    MaskRaster mask;   // {0,1}
    std::string source_id;
    Date date;
};

// Center-crop both rasters to crop x crop, slice into tile x tile patches
// (crop must be a multiple of tile), drop every patch touched by nodata in
// either raster. The rasters must be co-registered and the image dual-pol.
std::vector<SamplePair> prepare_pairs(const ByteRaster& image, const MaskRaster& mask,
                                      uint32_t crop, uint32_t tile,
                                      const std::string& source_id, Date date);

// Random horizontal and vertical flips, each with probability 1/2, applied
// to image and mask together.
void augment(SamplePair& p, Rng& rng);

struct TrainConfig {
    int epochs = 2000;
    int batch_size = 32;
    double learning_rate = 1e-4;
    uint64_t seed = 0;
    bool augment_flips = true;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double val_f1 = 0.0;
};

struct TrainResult {
    UNet<float> best_model;
    int best_epoch = 0;
    std::vector<EpochStats> history;
};

using EpochCallback = void (*)(const EpochStats&, void*);

// Adam on BCE+Dice over shuffled mini-batches; keeps the parameters of the
// epoch with the best validation pixel accuracy (earlier epoch on ties).
TrainResult train(const std::vector<SamplePair>& train_pairs,
                  const std::vector<SamplePair>& val_pairs, const UNetConfig& net_cfg,
                  const TrainConfig& cfg, EpochCallback on_epoch = nullptr,
                  void* on_epoch_arg = nullptr);

struct EvalStats {
    ConfusionCounts counts;
    double loss = 0.0;
    double pixel_accuracy = 0.0;
    double precision = 0.0;  // 0 when undefined
    double recall = 0.0;
    double f1 = 0.0;
};

// Forward pass at threshold 0.5 over a set of pairs. Metrics with a zero
// denominator report 0 rather than failing, so degenerate early epochs can
// still be logged.
EvalStats evaluate(const UNet<float>& model, const std::vector<SamplePair>& pairs);

// Quantized bytes scaled by 1/255 into [0,1]; nodata bytes map to 0.
TensorF batch_images(const std::vector<const SamplePair*>& pairs);
TensorF batch_masks(const std::vector<const SamplePair*>& pairs);

// History CSV with header "epoch,train_loss,val_loss,val_accuracy,val_f1".
void write_history_csv(const std::vector<EpochStats>& history, const std::string& path);

}  // namespace aqua
