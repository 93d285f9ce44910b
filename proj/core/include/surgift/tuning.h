#pragma once
// Surgical fine-tuning: freeze masks with per-tensor LR multipliers, strategy
// schedules (gradual unfreezing), the L1-to-anchor regularizer, and the
// optimizers that respect all of it.

#include "surgift/data.h"
#include "surgift/model.h"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace surgift {

struct plan_entry {
    bool trainable = false;
    double lr_scale = 1.0;  // ignored when trainable=false
};

struct tuning_plan {
    std::map<std::string, plan_entry> entries;  // one entry per model parameter
    // Optional per-epoch rewrite of entries (gradual unfreezing, auto criteria).
    // Called with the 0-based epoch index before that epoch's batches run.
    std::function<void(int, tuning_plan&)> schedule;

    bool trainable(const std::string& name) const;
    double scale(const std::string& name) const;
    std::vector<std::string> trainable_names() const;
};

struct selector {
    enum kind_t { all, blocks, last_layer, first_k_layers, custom };
    kind_t kind = all;
    std::set<int> block_set;          // kind == blocks; use last_block for the head
    int k = 1;                        // kind == first_k_layers: first k trunk blocks
    std::vector<std::string> names;   // kind == custom

    static selector all_params() { return {}; }
    static selector for_blocks(std::set<int> b) { return {blocks, std::move(b), 1, {}}; }
    static selector for_last_layer() { return {last_layer, {}, 1, {}}; }
    static selector first_k(int k) { return {first_k_layers, {}, k, {}}; }
    static selector custom_names(std::vector<std::string> n) {
        return {custom, {}, 1, std::move(n)};
    }
};

// Marks exactly the selected tensors trainable with lr_scale=1; every model
// parameter gets an entry. Unknown block indices or names are errors.
tuning_plan make_plan(const model& m, const selector& sel);

enum class unfreeze_direction { first_to_last, last_to_first };

// Cumulative unfreezing over the model's block units (trunk blocks plus the
// last layer), one additional unit every ceil(total_epochs / units) epochs
// starting from the stated end. Requires total_epochs >= number of units.
tuning_plan gradual_unfreeze_schedule(unfreeze_direction dir, int total_epochs, const model& m);

enum class opt_kind { sgd, adam };

struct optimizer_state {
    opt_kind kind = opt_kind::adam;
    double base_lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    long step_count = 0;
    // Moment arrays exist only for tensors that have been trainable at some step.
    std::map<std::string, std::vector<double>> m1;
    std::map<std::string, std::vector<double>> m2;
};

struct l1_sp_regularizer {
    double strength = 0.0;   // lambda >= 0
    checkpoint anchor;       // pre-trained parameters; shapes must match the model
};

struct step_metrics {
    double loss = 0.0;
    std::map<std::string, double> grad_norms;  // every tensor, post-regularizer
};

// Applies one optimizer update from the gradients currently stored in the
// model's parameters. Trainable tensors move with effective LR
// base_lr * lr_scale; frozen tensors stay bit-identical; L1SP adds
// lambda * sign(theta - anchor) to trainable gradients only.
step_metrics apply_update(model& m, const tuning_plan& plan, optimizer_state& opt,
                          const l1_sp_regularizer* reg = nullptr);

// Loss callback: builds the loss node for one batch on the given tape.
using loss_fn = std::function<tensor_ptr(tape&, model&, const dataset&,
                                         const std::vector<std::size_t>& batch_idx)>;

// Forward + backward + apply_update for one batch.
step_metrics step(model& m, const tuning_plan& plan, optimizer_state& opt,
                  const dataset& data, const std::vector<std::size_t>& batch_idx,
                  const loss_fn& loss, const l1_sp_regularizer* reg = nullptr);

// Cross-entropy on labels for classification data, mean squared loss otherwise.
tensor_ptr default_loss(tape& tp, model& m, const dataset& data,
                        const std::vector<std::size_t>& batch_idx);

// Mean loss / accuracy of the current parameters over a whole dataset.
double eval_loss(model& m, const dataset& data);
double eval_accuracy(model& m, const dataset& data);

struct epoch_record {
    int epoch = 0;          // 1-based boundary index
    double train_loss = 0;  // mean over the epoch's batches
    double val_metric = 0;  // accuracy (classification) or loss (regression)
};

struct train_curves {
    std::vector<epoch_record> epochs;
    int best_epoch = 0;      // 0 means the pre-trained state was returned
    double best_val = 0.0;
};

struct fine_tune_hooks {
    // Called before each epoch's batches, after plan.schedule.
    std::function<void(int, model&, tuning_plan&)> pre_epoch;
    // Called after backward for each batch, before the optimizer update.
    std::function<void(int, int, model&, tuning_plan&)> post_grad;
};

struct fine_tune_options {
    int max_epochs = 10;
    std::size_t batch_size = 32;
    std::uint64_t shuffle_seed = 1;
    loss_fn loss;                 // defaults to default_loss
    const l1_sp_regularizer* reg = nullptr;
    fine_tune_hooks hooks;
};

struct fine_tune_result {
    checkpoint best;
    train_curves curves;
};

// Early stopping as best-checkpoint selection at epoch boundaries: validation
// accuracy (classification, higher wins) or loss (regression, lower wins);
// ties resolve to the earliest epoch. max_epochs=0 returns the pre-trained
// parameters unchanged. The model is left holding the best parameters.
fine_tune_result fine_tune(model& m, tuning_plan plan, optimizer_state opt,
                           const dataset& train, const dataset& val,
                           const fine_tune_options& options);

}  // namespace surgift
