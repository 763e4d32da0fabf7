#include "aed/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "aed/error.hpp"
#include "aed/parallel.hpp"
#include "aed/rng.hpp"

namespace aed {

using nlohmann::json;

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr std::size_t kBlockFrames = 8192; // fixed E-step partition, independent of jobs

struct Kahan {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// Per-component terms that stay constant within one E-step.
struct ComponentCache {
    std::vector<double> base;    // log w_k - 0.5 * sum_d log(2*pi*var_kd)
    std::vector<double> inv_var; // M x dim
};

ComponentCache make_cache(int m, int dim, const std::vector<double>& weights,
                          const std::vector<double>& variances) {
    ComponentCache c;
    c.base.resize(m);
    c.inv_var.resize(static_cast<std::size_t>(m) * dim);
    for (int k = 0; k < m; ++k) {
        double log_det = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double v = variances[static_cast<std::size_t>(k) * dim + d];
            log_det += std::log(v);
            c.inv_var[static_cast<std::size_t>(k) * dim + d] = 1.0 / v;
        }
        c.base[k] = std::log(weights[k]) - 0.5 * (dim * kLog2Pi + log_det);
    }
    return c;
}

// log p(x, k) for every component; returns log p(x) via logsumexp.
double component_log_joint(const double* x, int m, int dim, const std::vector<double>& means,
                           const ComponentCache& cache, double* log_joint) {
    for (int k = 0; k < m; ++k) {
        const double* mu = means.data() + static_cast<std::size_t>(k) * dim;
        const double* iv = cache.inv_var.data() + static_cast<std::size_t>(k) * dim;
        double q = 0.0;
        for (int d = 0; d < dim; ++d) {
            const double diff = x[d] - mu[d];
            q += diff * diff * iv[d];
        }
        log_joint[k] = cache.base[k] - 0.5 * q;
    }
    double mx = log_joint[0];
    for (int k = 1; k < m; ++k) mx = std::max(mx, log_joint[k]);
    double acc = 0.0;
    for (int k = 0; k < m; ++k) acc += std::exp(log_joint[k] - mx);
    return mx + std::log(acc);
}

struct BlockStats {
    std::vector<double> nk;     // M
    std::vector<double> sum;    // M x dim
    std::vector<double> sum_sq; // M x dim
    Kahan ll;
};

std::vector<double> kmeanspp_seed(const std::vector<double>& frames, std::size_t n, int dim, int m,
                                  Rng& rng) {
    std::vector<double> centers(static_cast<std::size_t>(m) * dim);
    std::vector<double> d2(n, std::numeric_limits<double>::max());

    std::size_t first = static_cast<std::size_t>(rng.uniform_index(n));
    std::copy_n(frames.data() + first * dim, dim, centers.data());

    for (int k = 1; k < m; ++k) {
        const double* last = centers.data() + static_cast<std::size_t>(k - 1) * dim;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* x = frames.data() + i * dim;
            double q = 0.0;
            for (int d = 0; d < dim; ++d) {
                const double diff = x[d] - last[d];
                q += diff * diff;
            }
            d2[i] = std::min(d2[i], q);
            total += d2[i];
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = static_cast<std::size_t>(rng.uniform_index(n)); // all mass on chosen points
        } else {
            const double r = rng.uniform() * total;
            double run = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                run += d2[i];
                if (run >= r) {
                    pick = i;
                    break;
                }
            }
        }
        std::copy_n(frames.data() + pick * dim, dim, centers.data() + static_cast<std::size_t>(k) * dim);
    }
    return centers;
}

json params_block(const MfccParams& p) {
    return json{{"sample_rate_hz", p.sample_rate_hz},
                {"frame_len", p.frame_len},
                {"frame_shift", p.frame_shift},
                {"fft_size", p.fft_size},
                {"num_mel_filters", p.num_mel_filters},
                {"mel_low_hz", p.mel_low_hz},
                {"mel_high_hz", p.mel_high_hz},
                {"num_cepstra", p.num_cepstra},
                {"preemphasis", p.preemphasis},
                {"log_floor", p.log_floor},
                {"delta_window", p.delta_window}};
}

MfccParams params_block_from(const json& j) {
    MfccParams p;
    p.sample_rate_hz = j.at("sample_rate_hz").get<int>();
    p.frame_len = j.at("frame_len").get<int>();
    p.frame_shift = j.at("frame_shift").get<int>();
    p.fft_size = j.at("fft_size").get<int>();
    p.num_mel_filters = j.at("num_mel_filters").get<int>();
    p.mel_low_hz = j.at("mel_low_hz").get<double>();
    p.mel_high_hz = j.at("mel_high_hz").get<double>();
    p.num_cepstra = j.at("num_cepstra").get<int>();
    p.preemphasis = j.at("preemphasis").get<double>();
    p.log_floor = j.at("log_floor").get<double>();
    p.delta_window = j.at("delta_window").get<int>();
    return p;
}

} // namespace

Vocabulary train_vocabulary(const std::vector<double>& frames_in, std::size_t num_frames, int dim,
                            int m, std::uint64_t seed, const GmmTrainOptions& options) {
    if (m < 1) throw ValidationError("vocabulary size must be >= 1");
    if (dim < 1) throw ValidationError("frame dimension must be >= 1");
    if (frames_in.size() != num_frames * static_cast<std::size_t>(dim)) {
        throw ValidationError("frame matrix size does not match N x dim");
    }
    if (num_frames < static_cast<std::size_t>(10) * m) {
        throw ValidationError("too few frames to train vocabulary: need at least 10*M = " +
                              std::to_string(10 * m) + ", got " + std::to_string(num_frames));
    }
    for (double v : frames_in) {
        if (!std::isfinite(v)) throw NumericError("non-finite value in training frames");
    }

    Rng rng(derive_seed(seed, 0x6d6d67 /*gmm*/));

    // Uniform subsample when the pool exceeds the memory budget.
    const std::vector<double>* frames = &frames_in;
    std::vector<double> subsampled;
    std::size_t n = num_frames;
    if (num_frames > options.subsample_max) {
        auto idx = rng.sample_indices(num_frames, options.subsample_max);
        std::sort(idx.begin(), idx.end());
        subsampled.resize(idx.size() * static_cast<std::size_t>(dim));
        for (std::size_t i = 0; i < idx.size(); ++i) {
            std::copy_n(frames_in.data() + idx[i] * dim, dim, subsampled.data() + i * dim);
        }
        frames = &subsampled;
        n = idx.size();
    }

    // Global per-dimension variance: initial covariances and reinit fallback.
    std::vector<double> global_mean(dim, 0.0);
    std::vector<double> global_var(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (int d = 0; d < dim; ++d) global_mean[d] += (*frames)[i * dim + d];
    }
    for (int d = 0; d < dim; ++d) global_mean[d] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int d = 0; d < dim; ++d) {
            const double diff = (*frames)[i * dim + d] - global_mean[d];
            global_var[d] += diff * diff;
        }
    }
    for (int d = 0; d < dim; ++d) {
        global_var[d] = std::max(global_var[d] / static_cast<double>(n), options.variance_floor);
    }

    Vocabulary v;
    v.m = m;
    v.dim = dim;
    v.seed = seed;
    v.options = options;
    v.weights.assign(m, 1.0 / m);
    v.means = kmeanspp_seed(*frames, n, dim, m, rng);
    v.variances.resize(static_cast<std::size_t>(m) * dim);
    for (int k = 0; k < m; ++k) {
        std::copy_n(global_var.data(), dim, v.variances.data() + static_cast<std::size_t>(k) * dim);
    }

    const std::size_t num_blocks = (n + kBlockFrames - 1) / kBlockFrames;
    std::vector<BlockStats> blocks(num_blocks);

    double prev_ll = -std::numeric_limits<double>::infinity();
    bool reinit_last_iter = false;
    int total_reinits = 0;

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        const ComponentCache cache = make_cache(m, dim, v.weights, v.variances);

        parallel_for(num_blocks, options.jobs, [&](std::size_t b) {
            BlockStats& s = blocks[b];
            s.nk.assign(m, 0.0);
            s.sum.assign(static_cast<std::size_t>(m) * dim, 0.0);
            s.sum_sq.assign(static_cast<std::size_t>(m) * dim, 0.0);
            s.ll = Kahan{};
            std::vector<double> log_joint(m);
            const std::size_t lo = b * kBlockFrames;
            const std::size_t hi = std::min(lo + kBlockFrames, n);
            for (std::size_t i = lo; i < hi; ++i) {
                const double* x = frames->data() + i * dim;
                const double lse = component_log_joint(x, m, dim, v.means, cache, log_joint.data());
                s.ll.add(lse);
                for (int k = 0; k < m; ++k) {
                    const double r = std::exp(log_joint[k] - lse);
                    if (r < 1e-16) continue; // negligible responsibility
                    s.nk[k] += r;
                    double* sum_row = s.sum.data() + static_cast<std::size_t>(k) * dim;
                    double* sq_row = s.sum_sq.data() + static_cast<std::size_t>(k) * dim;
                    for (int d = 0; d < dim; ++d) {
                        const double xv = x[d];
                        sum_row[d] += r * xv;
                        sq_row[d] += r * xv * xv;
                    }
                }
            }
        });

        // Reduce in fixed block order so results do not depend on jobs.
        std::vector<double> nk(m, 0.0);
        std::vector<double> sum(static_cast<std::size_t>(m) * dim, 0.0);
        std::vector<double> sum_sq(static_cast<std::size_t>(m) * dim, 0.0);
        Kahan ll;
        for (const BlockStats& s : blocks) {
            for (int k = 0; k < m; ++k) nk[k] += s.nk[k];
            for (std::size_t i = 0; i < sum.size(); ++i) {
                sum[i] += s.sum[i];
                sum_sq[i] += s.sum_sq[i];
            }
            ll.add(s.ll.sum);
        }
        const double ll_per_frame = ll.sum / static_cast<double>(n);
        v.info.ll_history.push_back(ll_per_frame);
        v.info.iterations = iter + 1;

        if (!reinit_last_iter && ll_per_frame < prev_ll - 1e-9) {
            throw NumericError("EM log-likelihood decreased at iteration " + std::to_string(iter) +
                               " (" + std::to_string(prev_ll) + " -> " + std::to_string(ll_per_frame) +
                               ")");
        }
        const bool converged = !reinit_last_iter && iter > 0 &&
                               ll_per_frame - prev_ll < options.tol_per_frame;
        prev_ll = ll_per_frame;
        v.info.final_ll_per_frame = ll_per_frame;
        if (converged) {
            v.info.converged = true;
            break;
        }

        // M-step with variance flooring and starved-component reinitialization.
        reinit_last_iter = false;
        for (int k = 0; k < m; ++k) {
            if (nk[k] < 2.0) {
                ++total_reinits;
                if (total_reinits > options.max_reinits) {
                    throw NumericError("EM degenerate: more than " +
                                       std::to_string(options.max_reinits) +
                                       " component reinitializations");
                }
                const std::size_t pick = static_cast<std::size_t>(rng.uniform_index(n));
                std::copy_n(frames->data() + pick * dim, dim,
                            v.means.data() + static_cast<std::size_t>(k) * dim);
                std::copy_n(global_var.data(), dim,
                            v.variances.data() + static_cast<std::size_t>(k) * dim);
                v.weights[k] = 1.0 / m;
                reinit_last_iter = true;
                continue;
            }
            v.weights[k] = nk[k] / static_cast<double>(n);
            double* mu = v.means.data() + static_cast<std::size_t>(k) * dim;
            double* var = v.variances.data() + static_cast<std::size_t>(k) * dim;
            const double* s1 = sum.data() + static_cast<std::size_t>(k) * dim;
            const double* s2 = sum_sq.data() + static_cast<std::size_t>(k) * dim;
            for (int d = 0; d < dim; ++d) {
                mu[d] = s1[d] / nk[k];
                var[d] = std::max(s2[d] / nk[k] - mu[d] * mu[d], options.variance_floor);
            }
        }
        double wsum = 0.0;
        for (double w : v.weights) wsum += w;
        for (double& w : v.weights) w /= wsum;
    }

    v.info.reinits = total_reinits;
    return v;
}

std::vector<double> posterior(const Vocabulary& vocab, const double* frame, int dim) {
    if (dim != vocab.dim) {
        throw ValidationError("frame dimension " + std::to_string(dim) +
                              " does not match vocabulary dimension " + std::to_string(vocab.dim));
    }
    for (int d = 0; d < dim; ++d) {
        if (!std::isfinite(frame[d])) throw NumericError("non-finite value in frame");
    }
    const ComponentCache cache = make_cache(vocab.m, vocab.dim, vocab.weights, vocab.variances);
    std::vector<double> log_joint(vocab.m);
    const double lse = component_log_joint(frame, vocab.m, vocab.dim, vocab.means, cache,
                                           log_joint.data());
    std::vector<double> p(vocab.m);
    for (int k = 0; k < vocab.m; ++k) p[k] = std::exp(log_joint[k] - lse);
    return p;
}

std::vector<double> posterior(const Vocabulary& vocab, const std::vector<double>& frame) {
    return posterior(vocab, frame.data(), static_cast<int>(frame.size()));
}

BoawVector quantize(const Vocabulary& vocab, const MfccMatrix& mfcc) {
    if (mfcc.rows < 1) throw ValidationError("cannot quantize empty frame matrix: " + mfcc.clip_id);
    if (mfcc.cols != vocab.dim) {
        throw ValidationError("feature dimension " + std::to_string(mfcc.cols) +
                              " does not match vocabulary dimension " + std::to_string(vocab.dim));
    }
    // One cache for all frames; per-frame math matches posterior() exactly.
    const ComponentCache cache = make_cache(vocab.m, vocab.dim, vocab.weights, vocab.variances);
    std::vector<double> log_joint(vocab.m);
    BoawVector out;
    out.clip_id = mfcc.clip_id;
    out.alpha.assign(vocab.m, 0.0);
    for (int t = 0; t < mfcc.rows; ++t) {
        const double lse = component_log_joint(mfcc.row(t), vocab.m, vocab.dim, vocab.means, cache,
                                               log_joint.data());
        for (int k = 0; k < vocab.m; ++k) out.alpha[k] += std::exp(log_joint[k] - lse);
    }
    for (double& a : out.alpha) a /= static_cast<double>(mfcc.rows);
    return out;
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
    json j;
    j["format"] = "aed-vocabulary";
    j["version"] = 1;
    j["m"] = vocab.m;
    j["dim"] = vocab.dim;
    j["weights"] = vocab.weights;
    j["means"] = vocab.means;
    j["variances"] = vocab.variances;
    j["training_folds"] = vocab.training_folds;
    j["seed"] = vocab.seed;
    j["dsp"] = params_block(vocab.dsp);
    j["train_options"] = json{{"max_iterations", vocab.options.max_iterations},
                              {"tol_per_frame", vocab.options.tol_per_frame},
                              {"variance_floor", vocab.options.variance_floor},
                              {"max_reinits", vocab.options.max_reinits},
                              {"subsample_max", vocab.options.subsample_max},
                              {"init", "kmeans++"}};
    j["train_info"] = json{{"iterations", vocab.info.iterations},
                           {"reinits", vocab.info.reinits},
                           {"converged", vocab.info.converged},
                           {"final_ll_per_frame", vocab.info.final_ll_per_frame}};
    return j.dump(2);
}

Vocabulary vocabulary_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("bad vocabulary file: ") + ex.what());
    }
    if (j.value("format", "") != "aed-vocabulary") throw ParseError("not a vocabulary file");

    Vocabulary v;
    v.m = j.at("m").get<int>();
    v.dim = j.at("dim").get<int>();
    v.weights = j.at("weights").get<std::vector<double>>();
    v.means = j.at("means").get<std::vector<double>>();
    v.variances = j.at("variances").get<std::vector<double>>();
    v.training_folds = j.at("training_folds").get<std::vector<int>>();
    v.seed = j.at("seed").get<std::uint64_t>();
    v.dsp = params_block_from(j.at("dsp"));
    const json& o = j.at("train_options");
    v.options.max_iterations = o.at("max_iterations").get<int>();
    v.options.tol_per_frame = o.at("tol_per_frame").get<double>();
    v.options.variance_floor = o.at("variance_floor").get<double>();
    v.options.max_reinits = o.at("max_reinits").get<int>();
    v.options.subsample_max = o.at("subsample_max").get<std::size_t>();
    const json& i = j.at("train_info");
    v.info.iterations = i.at("iterations").get<int>();
    v.info.reinits = i.at("reinits").get<int>();
    v.info.converged = i.at("converged").get<bool>();
    v.info.final_ll_per_frame = i.at("final_ll_per_frame").get<double>();
    return v;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write vocabulary: " + path);
    f << vocabulary_to_json(vocab);
    if (!f) throw IoError("short write: " + path);
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open vocabulary: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return vocabulary_from_json(text);
}

} // namespace aed
