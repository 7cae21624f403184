#include "igsyn/model.hpp"

#include <algorithm>
#include <cmath>

#include "igsyn/contract.hpp"

namespace igsyn {

void softmax_inplace(std::span<double> logits) {
    IGSYN_REQUIRE(!logits.empty(), "softmax of empty logits");
    double hi = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - hi);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

std::size_t ClassifierSpec::param_count() const {
    if (hidden_dim == 0) {
        return static_cast<std::size_t>(class_count) * input_dim + class_count;
    }
    return static_cast<std::size_t>(hidden_dim) * input_dim + hidden_dim +
           static_cast<std::size_t>(class_count) * hidden_dim + class_count;
}

std::map<std::string, Segment> ClassifierSpec::segment_map() const {
    IGSYN_REQUIRE(input_dim > 0 && class_count > 0 && hidden_dim >= 0,
                  "classifier dims must be positive");
    std::map<std::string, Segment> segs;
    std::size_t off = 0;
    auto add = [&](const std::string& name, std::size_t len) {
        segs[name] = Segment{off, len};
        off += len;
    };
    if (hidden_dim == 0) {
        add("W", static_cast<std::size_t>(class_count) * input_dim);
        add("b", static_cast<std::size_t>(class_count));
    } else {
        add("W1", static_cast<std::size_t>(hidden_dim) * input_dim);
        add("b1", static_cast<std::size_t>(hidden_dim));
        add("W2", static_cast<std::size_t>(class_count) * hidden_dim);
        add("b2", static_cast<std::size_t>(class_count));
    }
    return segs;
}

ParamVector ClassifierSpec::init_params(RngStream& rng, double scale) const {
    ParamVector p = ParamVector::zeros(segment_map());
    for (double& v : p.mutable_values()) v = scale * rng.normal();
    return p;
}

namespace {

// logits = W x + b with W row-major (rows x cols).
void affine(std::span<const double> w, std::span<const double> b,
            std::span<const double> x, std::span<double> out) {
    std::size_t rows = b.size();
    std::size_t cols = x.size();
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b[r];
        const double* wr = w.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
}

struct ClassifierForward {
    std::vector<double> hidden;      // post-tanh, empty when linear
    std::vector<double> probs;       // softmax over classes
};

ClassifierForward classifier_forward(const ClassifierSpec& spec,
                                     const ParamVector& params,
                                     std::span<const double> x) {
    IGSYN_REQUIRE(static_cast<int>(x.size()) == spec.input_dim,
                  "feature dim mismatch");
    IGSYN_REQUIRE(params.size() == spec.param_count(),
                  "classifier param count mismatch");
    ClassifierForward f;
    f.probs.resize(spec.class_count);
    if (spec.hidden_dim == 0) {
        affine(params.segment("W"), params.segment("b"), x, f.probs);
    } else {
        f.hidden.resize(spec.hidden_dim);
        affine(params.segment("W1"), params.segment("b1"), x, f.hidden);
        for (double& h : f.hidden) h = std::tanh(h);
        affine(params.segment("W2"), params.segment("b2"), f.hidden, f.probs);
    }
    softmax_inplace(f.probs);
    return f;
}

}  // namespace

double loss(const ClassifierSpec& spec, const ParamVector& params,
            const LabeledExample& example) {
    IGSYN_REQUIRE(example.label >= 0 && example.label < spec.class_count,
                  "label out of range");
    ClassifierForward f = classifier_forward(spec, params, example.features);
    // Clamp away from zero so a confidently wrong model yields a large
    // finite loss instead of inf.
    double p = std::max(f.probs[example.label], 1e-300);
    return -std::log(p);
}

std::vector<double> grad(const ClassifierSpec& spec, const ParamVector& params,
                         const LabeledExample& example) {
    IGSYN_REQUIRE(example.label >= 0 && example.label < spec.class_count,
                  "label out of range");
    ClassifierForward f = classifier_forward(spec, params, example.features);
    std::vector<double> g(params.size(), 0.0);
    auto seg = [&](const char* name) {
        Segment s = params.segments().at(name);
        return std::span<double>(g.data() + s.offset, s.length);
    };

    // dL/dlogit_k = p_k - 1[k == label]
    std::vector<double> dlogits = f.probs;
    dlogits[example.label] -= 1.0;

    const std::span<const double> x(example.features);
    if (spec.hidden_dim == 0) {
        auto gw = seg("W");
        auto gb = seg("b");
        for (int r = 0; r < spec.class_count; ++r) {
            gb[r] = dlogits[r];
            double* row = gw.data() + static_cast<std::size_t>(r) * spec.input_dim;
            for (int c = 0; c < spec.input_dim; ++c) row[c] = dlogits[r] * x[c];
        }
    } else {
        auto gw2 = seg("W2");
        auto gb2 = seg("b2");
        std::vector<double> dhidden(spec.hidden_dim, 0.0);
        auto w2 = params.segment("W2");
        for (int r = 0; r < spec.class_count; ++r) {
            gb2[r] = dlogits[r];
            double* row = gw2.data() + static_cast<std::size_t>(r) * spec.hidden_dim;
            const double* w2r = w2.data() + static_cast<std::size_t>(r) * spec.hidden_dim;
            for (int c = 0; c < spec.hidden_dim; ++c) {
                row[c] = dlogits[r] * f.hidden[c];
                dhidden[c] += dlogits[r] * w2r[c];
            }
        }
        auto gw1 = seg("W1");
        auto gb1 = seg("b1");
        for (int r = 0; r < spec.hidden_dim; ++r) {
            double dpre = dhidden[r] * (1.0 - f.hidden[r] * f.hidden[r]);
            gb1[r] = dpre;
            double* row = gw1.data() + static_cast<std::size_t>(r) * spec.input_dim;
            for (int c = 0; c < spec.input_dim; ++c) row[c] = dpre * x[c];
        }
    }
    return g;
}

std::vector<double> predict(const ClassifierSpec& spec, const ParamVector& params,
                            std::span<const double> features) {
    return classifier_forward(spec, params, features).probs;
}

std::size_t PolicySpec::param_count() const {
    return static_cast<std::size_t>(vocab_size) * input_dim() + vocab_size;
}

std::map<std::string, Segment> PolicySpec::segment_map() const {
    IGSYN_REQUIRE(vocab_size > 0 && rubric_length > 0 && context_dim > 0,
                  "policy dims must be positive");
    std::map<std::string, Segment> segs;
    segs["W"] = Segment{0, static_cast<std::size_t>(vocab_size) * input_dim()};
    segs["b"] = Segment{segs["W"].length, static_cast<std::size_t>(vocab_size)};
    return segs;
}

ParamVector PolicySpec::init_params() const {
    return ParamVector::zeros(segment_map());
}

void policy_input(const PolicySpec& spec, std::span<const double> context,
                  int position, int prev_token, std::span<double> out) {
    IGSYN_REQUIRE(static_cast<int>(context.size()) == spec.context_dim,
                  "context dim mismatch");
    IGSYN_REQUIRE(position >= 0 && position < spec.rubric_length,
                  "position out of range");
    IGSYN_REQUIRE(static_cast<int>(out.size()) == spec.input_dim(),
                  "policy input buffer size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    std::copy(context.begin(), context.end(), out.begin());
    out[spec.context_dim + position] = 1.0;
    if (position > 0) {
        IGSYN_REQUIRE(prev_token >= 0 && prev_token < spec.vocab_size,
                      "previous token out of range");
        out[spec.context_dim + spec.rubric_length + prev_token] = 1.0;
    }
}

void policy_logits(const PolicySpec& spec, const ParamVector& params,
                   std::span<const double> input, std::span<double> out) {
    IGSYN_REQUIRE(params.size() == spec.param_count(),
                  "policy param count mismatch");
    affine(params.segment("W"), params.segment("b"), input, out);
}

void policy_accumulate_logit_grad(const PolicySpec& spec,
                                  std::span<const double> input,
                                  std::span<const double> dlogits,
                                  std::span<double> grad_out) {
    IGSYN_REQUIRE(grad_out.size() == spec.param_count(),
                  "policy grad buffer size mismatch");
    std::size_t in = input.size();
    double* gw = grad_out.data();
    double* gb = grad_out.data() + static_cast<std::size_t>(spec.vocab_size) * in;
    for (int r = 0; r < spec.vocab_size; ++r) {
        double d = dlogits[r];
        if (d == 0.0) continue;
        double* row = gw + static_cast<std::size_t>(r) * in;
        for (std::size_t c = 0; c < in; ++c) row[c] += d * input[c];
        gb[r] += d;
    }
}

PolicyEval policy_logprobs(const PolicySpec& spec, const ParamVector& params,
                           std::span<const double> context,
                           std::span<const int> tokens) {
    IGSYN_REQUIRE(static_cast<int>(tokens.size()) == spec.rubric_length,
                  "token count mismatch");
    PolicyEval ev;
    ev.logprobs.reserve(tokens.size());
    ev.dists.reserve(tokens.size());
    std::vector<double> input(spec.input_dim());
    for (int t = 0; t < spec.rubric_length; ++t) {
        int tok = tokens[t];
        IGSYN_REQUIRE(tok >= 0 && tok < spec.vocab_size, "token out of range");
        policy_input(spec, context, t, t > 0 ? tokens[t - 1] : -1, input);
        std::vector<double> dist(spec.vocab_size);
        policy_logits(spec, params, input, dist);
        softmax_inplace(dist);
        ev.logprobs.push_back(std::log(std::max(dist[tok], 1e-300)));
        ev.dists.push_back(std::move(dist));
    }
    return ev;
}

PolicySample policy_sample(const PolicySpec& spec, const ParamVector& params,
                           std::span<const double> context, double temperature,
                           RngStream& rng) {
    IGSYN_REQUIRE(temperature > 0.0, "temperature must be positive");
    PolicySample s;
    s.tokens.reserve(spec.rubric_length);
    s.behavior_logprobs.reserve(spec.rubric_length);
    std::vector<double> input(spec.input_dim());
    std::vector<double> dist(spec.vocab_size);
    for (int t = 0; t < spec.rubric_length; ++t) {
        policy_input(spec, context, t, t > 0 ? s.tokens.back() : -1, input);
        policy_logits(spec, params, input, dist);
        for (double& v : dist) v /= temperature;
        softmax_inplace(dist);
        double u = rng.uniform();
        double cum = 0.0;
        int tok = spec.vocab_size - 1;
        for (int k = 0; k < spec.vocab_size; ++k) {
            cum += dist[k];
            if (u < cum) {
                tok = k;
                break;
            }
        }
        s.tokens.push_back(tok);
        s.behavior_logprobs.push_back(std::log(std::max(dist[tok], 1e-300)));
    }
    return s;
}

std::vector<double> policy_grad_logprob(const PolicySpec& spec,
                                        const ParamVector& params,
                                        std::span<const double> context,
                                        std::span<const int> tokens) {
    PolicyEval ev = policy_logprobs(spec, params, context, tokens);
    std::vector<double> g(spec.param_count(), 0.0);
    std::vector<double> input(spec.input_dim());
    std::vector<double> dlogits(spec.vocab_size);
    for (int t = 0; t < spec.rubric_length; ++t) {
        policy_input(spec, context, t, t > 0 ? tokens[t - 1] : -1, input);
        // d log p(tok) / dlogit_k = 1[k == tok] - p_k
        for (int k = 0; k < spec.vocab_size; ++k) dlogits[k] = -ev.dists[t][k];
        dlogits[tokens[t]] += 1.0;
        policy_accumulate_logit_grad(spec, input, dlogits, g);
    }
    return g;
}

}  // namespace igsyn
