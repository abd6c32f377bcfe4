#pragma once

#include <agrivote/errors.hpp>
#include <agrivote/probability.hpp>
#include <agrivote/util.hpp>

#include <string>
#include <vector>

/// True iff fn() throws agrivote::Error with exactly the given code.
template <typename Fn>
bool throws_code(Fn&& fn, agrivote::ErrorCode code) {
    try {
        fn();
    } catch (const agrivote::Error& e) {
        return e.code() == code;
    } catch (...) {
        return false;
    }
    return false;
}

/// Random row-stochastic matrix with distinct image ids.
inline agrivote::ProbabilityMatrix random_prob_matrix(agrivote::Rng& rng, int rows, int cols,
                                                      const std::string& tag) {
    agrivote::ProbabilityMatrix m;
    m.model_tag = tag;
    m.values.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (int c = 0; c < cols; ++c) {
            const double v = rng.uniform() + 1e-6;
            m.values(r, c) = v;
            sum += v;
        }
        for (int c = 0; c < cols; ++c) m.values(r, c) /= sum;
        char id[32];
        std::snprintf(id, sizeof(id), "img_%05d", r);
        m.image_ids.emplace_back(id);
    }
    return m;
}
