#ifndef MIXPROD_IO_HPP
#define MIXPROD_IO_HPP

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixprod/adversarial.hpp"
#include "mixprod/common.hpp"
#include "mixprod/errors.hpp"
#include "mixprod/identify.hpp"
#include "mixprod/model.hpp"
#include "mixprod/moments.hpp"
#include "mixprod/sampler.hpp"

namespace mixprod {

using nlohmann::json;

namespace detail {

inline json to_json(const Vector& v) {
    json a = json::array();
    for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (long i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Vector vector_from_json(const json& a, const char* what) {
    if (!a.is_array()) throw PreconditionFailed(std::string(what) + ": expected an array");
    Vector v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number()) throw PreconditionFailed(std::string(what) + ": expected numbers");
        v[static_cast<long>(i)] = a[i].get<double>();
    }
    return v;
}

inline Matrix matrix_from_json(const json& a, const char* what) {
    if (!a.is_array()) throw PreconditionFailed(std::string(what) + ": expected an array of rows");
    const std::size_t rows = a.size();
    std::size_t cols = 0;
    if (rows > 0) {
        if (!a[0].is_array())
            throw PreconditionFailed(std::string(what) + ": expected an array of rows");
        cols = a[0].size();
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!a[i].is_array() || a[i].size() != cols)
            throw PreconditionFailed(std::string(what) + ": ragged rows");
        for (std::size_t j = 0; j < cols; ++j) {
            if (!a[i][j].is_number())
                throw PreconditionFailed(std::string(what) + ": expected numbers");
            m(i, j) = a[i][j].get<double>();
        }
    }
    return m;
}

inline json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionFailed("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw PreconditionFailed(path + ": " + e.what());
    }
    return j;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PreconditionFailed("cannot write " + path);
    out << text;
    if (!out) throw PreconditionFailed("write failed: " + path);
}

}  // namespace detail

// Model JSON: {"k": int, "n": int, "pi": [k], "m": [n][k]}.
inline json model_to_json(const MixtureModel& model) {
    return json{{"k", model.k},
                {"n", model.n},
                {"pi", detail::to_json(model.pi)},
                {"m", detail::to_json(model.m)}};
}

// `strict` enforces the class invariants (simplex weights, means in [0, 1]);
// lenient loading accepts shape-valid parameter sets such as identification
// output, which may sit a few ulps outside the class.
inline MixtureModel model_from_json(const json& j, bool strict = true) {
    if (!j.contains("k") || !j.contains("n") || !j.contains("pi") || !j.contains("m"))
        throw PreconditionFailed("model: missing one of required fields k, n, pi, m");
    MixtureModel model;
    model.k = j.at("k").get<int>();
    model.n = j.at("n").get<int>();
    model.pi = detail::vector_from_json(j.at("pi"), "model.pi");
    model.m = detail::matrix_from_json(j.at("m"), "model.m");
    if (model.pi.size() != model.k || model.m.rows() != model.n || model.m.cols() != model.k)
        throw PreconditionFailed("model: pi/m shapes disagree with k, n");
    if (!model.pi.allFinite() || !model.m.allFinite())
        throw PreconditionFailed("model: non-finite entry");
    if (strict) model.validate();
    return model;
}

inline void save_model(const MixtureModel& model, const std::string& path) {
    detail::write_text(path, model_to_json(model).dump(2) + "\n");
}

inline MixtureModel load_model(const std::string& path, bool strict = true) {
    return model_from_json(detail::parse_file(path), strict);
}

// Moments JSON: {"n": int, "values": [2^n]} in ascending bitmask order.
inline json moments_to_json(const MomentVector& mu) {
    return json{{"n", mu.n}, {"values", detail::to_json(mu.values)}};
}

inline MomentVector moments_from_json(const json& j) {
    if (!j.contains("n") || !j.contains("values"))
        throw PreconditionFailed("moments: missing required fields n, values");
    MomentVector mu;
    mu.n = j.at("n").get<int>();
    mu.values = detail::vector_from_json(j.at("values"), "moments.values");
    mu.validate();
    return mu;
}

inline void save_moments(const MomentVector& mu, const std::string& path) {
    detail::write_text(path, moments_to_json(mu).dump(2) + "\n");
}

inline MomentVector load_moments(const std::string& path) {
    return moments_from_json(detail::parse_file(path));
}

// Samples text: one '#' header line with n, N and the seed, then one sample
// per line as n space-separated 0/1 tokens.
inline void save_samples(const SampleBatch& batch, const std::string& path) {
    std::ostringstream os;
    os << "# samples n=" << batch.n << " N=" << batch.N << " seed=" << batch.seed << "\n";
    for (long s = 0; s < batch.data.rows(); ++s) {
        for (int i = 0; i < batch.n; ++i) {
            if (i) os << ' ';
            os << static_cast<int>(batch.data(s, i));
        }
        os << '\n';
    }
    detail::write_text(path, os.str());
}

inline SampleBatch load_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PreconditionFailed("cannot open " + path);
    SampleBatch batch;
    long header_n = -1;
    std::vector<std::vector<std::uint8_t>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') {
            std::size_t pos = line.find("n=");
            if (pos != std::string::npos) header_n = std::strtol(line.c_str() + pos + 2, nullptr, 10);
            std::size_t spos = line.find("seed=");
            if (spos != std::string::npos)
                batch.seed = std::strtoull(line.c_str() + spos + 5, nullptr, 10);
            continue;
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::vector<std::uint8_t> row;
        int tok;
        while (ls >> tok) {
            if (tok != 0 && tok != 1)
                throw PreconditionFailed(path + ": non-binary sample token " +
                                         std::to_string(tok));
            row.push_back(static_cast<std::uint8_t>(tok));
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw PreconditionFailed(path + ": ragged sample rows");
        rows.push_back(std::move(row));
    }
    batch.N = static_cast<std::int64_t>(rows.size());
    batch.n = rows.empty() ? static_cast<int>(std::max<long>(header_n, 0))
                           : static_cast<int>(rows.front().size());
    if (header_n >= 0 && !rows.empty() && header_n != batch.n)
        throw PreconditionFailed(path + ": header n disagrees with row width");
    batch.data.resize(batch.N, batch.n);
    for (long s = 0; s < batch.N; ++s)
        for (int i = 0; i < batch.n; ++i) batch.data(s, i) = rows[s][i];
    return batch;
}

// Result JSON: {"k","n","pi","m","partition":{"S","T","anchor"},"diagnostics"}.
// m carries one row per stored observable; the CLI stores all n of them, with
// "partition" recording which ones identification actually used.
inline json result_to_json(const IdentificationResult& res) {
    json diag{{"sigma_k_Ctilde", res.diagnostics.sigma_k_Ctilde},
              {"eig_imag_residual", res.diagnostics.eig_imag_residual},
              {"eig_defect", res.diagnostics.eig_defect},
              {"fit_residual", res.diagnostics.fit_residual},
              {"column_scales", detail::to_json(res.diagnostics.column_scales)},
              {"anchor_eigenvalues", detail::to_json(res.diagnostics.anchor_eigenvalues)},
              {"full_size_partition", res.diagnostics.full_size_partition}};
    json part{{"S", res.partition.S}, {"T", res.partition.T}, {"anchor", res.partition.anchor}};
    return json{{"k", static_cast<int>(res.pi_tilde.size())},
                {"n", static_cast<int>(res.m_tilde.rows())},
                {"pi", detail::to_json(res.pi_tilde)},
                {"m", detail::to_json(res.m_tilde)},
                {"partition", std::move(part)},
                {"diagnostics", std::move(diag)}};
}

inline void save_result(const IdentificationResult& res, const std::string& path) {
    detail::write_text(path, result_to_json(res).dump(2) + "\n");
}

// Pair JSON mirrors the construction: base/alternate models plus the measured
// certificates.
inline json pair_to_json(const AdversarialPair& pair) {
    return json{{"base", model_to_json(pair.base)},
                {"alternate", model_to_json(pair.alternate)},
                {"sigma", pair.sigma},
                {"alpha", detail::to_json(pair.alpha)},
                {"eps", pair.eps},
                {"certified_model_gap", pair.certified_model_gap},
                {"certified_stat_gap", pair.certified_stat_gap}};
}

inline void save_pair(const AdversarialPair& pair, const std::string& path) {
    detail::write_text(path, pair_to_json(pair).dump(2) + "\n");
}

}  // namespace mixprod

#endif
