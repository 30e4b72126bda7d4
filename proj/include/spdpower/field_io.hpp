#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spdpower/errors.hpp"
#include "spdpower/likelihood.hpp"
#include "spdpower/matrix.hpp"
#include "spdpower/parallel.hpp"
#include "spdpower/spectral.hpp"
#include "spdpower/tensor_stats.hpp"
#include "spdpower/textio.hpp"

namespace spdpower {

/// One voxel of a tensor field: subject id, position in millimetres, and a
/// 3x3 positive semi-definite tensor.
struct VoxelRecord {
    std::string subject;
    std::array<double, 3> position{};
    SymMatrix tensor{3};
};

struct TensorField {
    std::vector<VoxelRecord> records;

    std::vector<std::string> subjects() const {
        std::set<std::string> ids;
        for (const VoxelRecord& r : records) ids.insert(r.subject);
        return std::vector<std::string>(ids.begin(), ids.end());
    }
};

enum class FieldFormat { Auto, Csv, JsonLines };

namespace detail {

inline const std::array<std::string, 10> kFieldColumns = {
    "subject", "x", "y", "z", "dxx", "dxy", "dxz", "dyy", "dyz", "dzz"};

inline VoxelRecord record_from_values(std::string subject,
                                      const std::array<double, 9>& values,
                                      std::size_t line) {
    VoxelRecord rec;
    rec.subject = std::move(subject);
    for (int k = 0; k < 3; ++k) {
        if (!std::isfinite(values[k])) throw ParseError("non-finite position", line);
        rec.position[k] = values[k];
    }
    try {
        rec.tensor = unvech(std::span<const double>(values.data() + 3, 6), 3);
    } catch (const DomainError&) {
        throw ParseError("non-finite tensor entry", line);
    }
    return rec;
}

inline TensorField parse_field_csv(std::istream& in) {
    TensorField field;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::vector<std::size_t> indefinite_rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = split_csv(line);
        if (!header_seen) {
            if (fields.size() != kFieldColumns.size())
                throw SchemaError("header must have " + std::to_string(kFieldColumns.size()) +
                                      " columns, got " + std::to_string(fields.size()),
                                  line_no);
            for (std::size_t k = 0; k < fields.size(); ++k)
                if (fields[k] != kFieldColumns[k])
                    throw SchemaError("unexpected header column '" + fields[k] +
                                          "', expected '" + kFieldColumns[k] + "'",
                                      line_no);
            header_seen = true;
            continue;
        }
        if (fields.size() != kFieldColumns.size())
            throw SchemaError("expected " + std::to_string(kFieldColumns.size()) +
                                  " columns, got " + std::to_string(fields.size()),
                              line_no);
        std::array<double, 9> values{};
        for (std::size_t k = 1; k < fields.size(); ++k) {
            const auto v = parse_double(fields[k]);
            if (!v) throw ParseError("cannot parse number '" + fields[k] + "'", line_no);
            values[k - 1] = *v;
        }
        VoxelRecord rec = record_from_values(fields[0], values, line_no);
        if (classify(rec.tensor) == DefinitenessClass::Indefinite)
            indefinite_rows.push_back(line_no);
        field.records.push_back(std::move(rec));
    }

    if (!header_seen) throw ParseError("empty file");
    if (field.records.empty()) throw ParseError("no voxel records after the header");
    if (!indefinite_rows.empty()) {
        std::string rows;
        for (std::size_t k = 0; k < indefinite_rows.size() && k < 20; ++k)
            rows += (k ? ", " : "") + std::to_string(indefinite_rows[k]);
        if (indefinite_rows.size() > 20) rows += ", ...";
        throw ParseError("tensors not positive semi-definite at line(s) " + rows);
    }
    return field;
}

inline TensorField parse_field_jsonl(std::istream& in) {
    TensorField field;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> indefinite_rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!obj.is_object()) throw SchemaError("each line must be a JSON object", line_no);
        if (!obj.contains("subject") || !obj["subject"].is_string())
            throw SchemaError("missing string field 'subject'", line_no);
        std::array<double, 9> values{};
        for (std::size_t k = 1; k < kFieldColumns.size(); ++k) {
            const std::string& key = kFieldColumns[k];
            if (!obj.contains(key) || !obj[key].is_number())
                throw SchemaError("missing numeric field '" + key + "'", line_no);
            values[k - 1] = obj[key].get<double>();
        }
        VoxelRecord rec = record_from_values(obj["subject"].get<std::string>(), values, line_no);
        if (classify(rec.tensor) == DefinitenessClass::Indefinite)
            indefinite_rows.push_back(line_no);
        field.records.push_back(std::move(rec));
    }

    if (field.records.empty()) throw ParseError("empty file");
    if (!indefinite_rows.empty()) {
        std::string rows;
        for (std::size_t k = 0; k < indefinite_rows.size() && k < 20; ++k)
            rows += (k ? ", " : "") + std::to_string(indefinite_rows[k]);
        if (indefinite_rows.size() > 20) rows += ", ...";
        throw ParseError("tensors not positive semi-definite at line(s) " + rows);
    }
    return field;
}

inline FieldFormat infer_format(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "csv") return FieldFormat::Csv;
    if (ext == "jsonl" || ext == "ndjson" || ext == "json") return FieldFormat::JsonLines;
    throw ParseError("cannot infer field format from extension '." + ext +
                     "'; pass the format explicitly");
}

} // namespace detail

inline TensorField load_field(std::istream& in, FieldFormat format) {
    if (format == FieldFormat::Csv) return detail::parse_field_csv(in);
    if (format == FieldFormat::JsonLines) return detail::parse_field_jsonl(in);
    throw std::invalid_argument("stream input needs an explicit format");
}

inline TensorField load_field(const std::string& path, FieldFormat format = FieldFormat::Auto) {
    if (format == FieldFormat::Auto) format = detail::infer_format(path);
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return load_field(in, format);
}

/// Per-subject normalization: every tensor of a subject is divided by the
/// Frobenius norm of that subject's arithmetic mean tensor, after which each
/// subject's mean tensor has unit norm.
inline TensorField normalize_subjects(const TensorField& field) {
    if (field.records.empty()) throw EmptyInputError("empty tensor field");
    std::map<std::string, SymMatrix> sums;
    std::map<std::string, std::size_t> counts;
    for (const VoxelRecord& r : field.records) {
        auto [it, fresh] = sums.try_emplace(r.subject, r.tensor.dim());
        it->second += r.tensor;
        ++counts[r.subject];
    }
    std::map<std::string, double> scale;
    for (const auto& [subject, sum] : sums) {
        const double norm =
            frobenius_norm(sum * (1.0 / static_cast<double>(counts[subject])));
        if (!(norm > 0.0))
            throw DegenerateError("subject '" + subject + "' has a zero-norm mean tensor");
        scale[subject] = 1.0 / norm;
    }
    TensorField out;
    out.records.reserve(field.records.size());
    for (const VoxelRecord& r : field.records)
        out.records.push_back({r.subject, r.position, r.tensor * scale[r.subject]});
    return out;
}

/// Ball neighborhood around one grid center: per-subject voxel lists, all
/// within `radius` of the center. n_v is the smallest per-subject count.
struct Neighborhood {
    std::array<double, 3> center{};
    std::map<std::string, std::vector<VoxelRecord>> members;
    int n_v = 0;
};

/// Grid centers are axis-aligned multiples of `spacing` (shifted by
/// `offset`) covering the bounding box of the voxel positions. A
/// neighborhood is kept when every subject of the field contributes at least
/// n_v_min voxels within the closed ball of `radius`. The output does not
/// depend on the record order of the input.
inline std::vector<Neighborhood> extract_neighborhoods(
    const TensorField& field, double spacing, double radius, int n_v_min,
    std::array<double, 3> offset = {0.0, 0.0, 0.0}) {
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
    if (n_v_min < 1) throw std::invalid_argument("n_v_min must be >= 1");
    if (field.records.empty()) throw EmptyInputError("empty tensor field");

    std::array<double, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
        lo[a] = hi[a] = field.records.front().position[a];
    }
    for (const VoxelRecord& r : field.records)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], r.position[a]);
            hi[a] = std::max(hi[a], r.position[a]);
        }

    std::array<long, 3> kmin{}, kmax{};
    for (int a = 0; a < 3; ++a) {
        kmin[a] = static_cast<long>(std::floor((lo[a] - offset[a]) / spacing));
        kmax[a] = static_cast<long>(std::ceil((hi[a] - offset[a]) / spacing));
    }

    const std::vector<std::string> subjects = field.subjects();
    const double r2 = radius * radius;
    std::vector<Neighborhood> out;

    for (long kx = kmin[0]; kx <= kmax[0]; ++kx)
        for (long ky = kmin[1]; ky <= kmax[1]; ++ky)
            for (long kz = kmin[2]; kz <= kmax[2]; ++kz) {
                const std::array<double, 3> center = {offset[0] + kx * spacing,
                                                      offset[1] + ky * spacing,
                                                      offset[2] + kz * spacing};
                Neighborhood nb;
                nb.center = center;
                for (const VoxelRecord& rec : field.records) {
                    double d2 = 0.0;
                    for (int a = 0; a < 3; ++a) {
                        const double d = rec.position[a] - center[a];
                        d2 += d * d;
                    }
                    if (d2 <= r2) nb.members[rec.subject].push_back(rec);
                }
                if (nb.members.size() != subjects.size()) continue;
                int min_count = static_cast<int>(nb.members.begin()->second.size());
                for (const auto& [subject, recs] : nb.members)
                    min_count = std::min(min_count, static_cast<int>(recs.size()));
                if (min_count < n_v_min) continue;
                nb.n_v = min_count;
                // record-order independence: sort members deterministically
                for (auto& [subject, recs] : nb.members)
                    std::sort(recs.begin(), recs.end(),
                              [](const VoxelRecord& a, const VoxelRecord& b) {
                                  if (a.position != b.position) return a.position < b.position;
                                  return a.tensor.vech() < b.tensor.vech();
                              });
                out.push_back(std::move(nb));
            }
    return out;
}

/// One fitted neighborhood of the alpha map. `fit` is absent when the
/// neighborhood could not be fitted; `status` is "ok", "insufficient_n",
/// "all_points_failed" or "domain_error".
struct AlphaMapEntry {
    std::array<double, 3> center{};
    std::size_t n = 0;
    std::optional<AlphaFit> fit;
    std::string status;
};

namespace detail {

// Sweep order of the centers: ascending projection on the principal axes of
// the center cloud (first axis dominant), so profiles traverse the field
// left to right.
inline std::vector<std::size_t> sweep_order(const std::vector<Neighborhood>& nbs) {
    const std::size_t k = nbs.size();
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    if (k < 2) return order;

    std::array<double, 3> mean{};
    for (const Neighborhood& nb : nbs)
        for (int a = 0; a < 3; ++a) mean[a] += nb.center[a];
    for (double& v : mean) v /= static_cast<double>(k);

    SymMatrix cov(3);
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            double sum = 0.0;
            for (const Neighborhood& nb : nbs)
                sum += (nb.center[a] - mean[a]) * (nb.center[b] - mean[b]);
            cov.set(a, b, sum / static_cast<double>(k));
        }
    const SpectralDecomp axes = spectral_decompose(cov);

    std::vector<std::array<double, 3>> proj(k);
    for (std::size_t i = 0; i < k; ++i)
        for (int a = 0; a < 3; ++a) {
            double sum = 0.0;
            for (int c = 0; c < 3; ++c)
                sum += (nbs[i].center[c] - mean[c]) * axes.eigenvectors(c, a);
            proj[i][a] = sum;
        }

    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (proj[x] != proj[y]) return proj[x] < proj[y];
        return nbs[x].center < nbs[y].center;
    });
    return order;
}

} // namespace detail

/// Fits alpha per neighborhood: all subjects' member tensors are pooled into
/// one sample with a common mu, sigma and alpha. Entries come back in sweep
/// order; per-neighborhood failures are recorded in the entry status rather
/// than thrown.
inline std::vector<AlphaMapEntry> estimate_alpha_map(
    const TensorField& field, const AlphaGrid& grid, double spacing, double radius, int n_v_min,
    double ci_drop = kDefaultCiDrop, int threads = 1,
    std::array<double, 3> offset = {0.0, 0.0, 0.0}) {
    const std::vector<Neighborhood> nbs =
        extract_neighborhoods(field, spacing, radius, n_v_min, offset);
    const std::vector<std::size_t> order = detail::sweep_order(nbs);

    std::vector<AlphaMapEntry> entries(nbs.size());
    parallel_for(nbs.size(), threads, [&](std::size_t slot) {
        const Neighborhood& nb = nbs[order[slot]];
        AlphaMapEntry& entry = entries[slot];
        entry.center = nb.center;
        std::vector<SymMatrix> samples;
        for (const auto& [subject, recs] : nb.members)
            for (const VoxelRecord& rec : recs) samples.push_back(rec.tensor);
        entry.n = samples.size();
        if (entry.n <= SymMatrix::vech_size(3)) {
            entry.status = "insufficient_n";
            return;
        }
        try {
            entry.fit = fit_alpha(samples, grid, ci_drop);
            entry.status = "ok";
        } catch (const AllPointsFailedError&) {
            entry.status = "all_points_failed";
        } catch (const DomainError&) {
            entry.status = "domain_error";
        }
    });
    return entries;
}

/// Running-mean smoother of the per-neighborhood alpha_hat / ci_lo / ci_hi
/// series (failed entries are skipped). Window is 2*bandwidth+1, shrunk
/// symmetrically toward the series ends; bandwidth 0 is the identity.
struct SmoothedProfile {
    std::vector<double> alpha;
    std::vector<double> ci_lo;
    std::vector<double> ci_hi;
};

inline SmoothedProfile smooth_alpha_profile(const std::vector<AlphaMapEntry>& entries,
                                            int bandwidth) {
    if (bandwidth < 0) throw std::invalid_argument("bandwidth must be >= 0");
    std::vector<double> a, lo, hi;
    for (const AlphaMapEntry& e : entries) {
        if (!e.fit) continue;
        a.push_back(e.fit->alpha_hat);
        lo.push_back(e.fit->ci_lo);
        hi.push_back(e.fit->ci_hi);
    }
    const auto smooth = [bandwidth](const std::vector<double>& x) {
        const long n = static_cast<long>(x.size());
        std::vector<double> out(x.size());
        for (long i = 0; i < n; ++i) {
            const long h = std::min<long>({bandwidth, i, n - 1 - i});
            double sum = 0.0;
            for (long j = i - h; j <= i + h; ++j) sum += x[j];
            out[i] = sum / static_cast<double>(2 * h + 1);
        }
        return out;
    };
    return SmoothedProfile{smooth(a), smooth(lo), smooth(hi)};
}

inline void write_alpha_map_csv(std::ostream& os, const std::vector<AlphaMapEntry>& entries) {
    os << "cx,cy,cz,n,alpha_hat,ci_lo,ci_hi,status\n";
    for (const AlphaMapEntry& e : entries) {
        os << format_double(e.center[0]) << ',' << format_double(e.center[1]) << ','
           << format_double(e.center[2]) << ',' << e.n << ',';
        if (e.fit)
            os << format_double(e.fit->alpha_hat) << ',' << format_double(e.fit->ci_lo) << ','
               << format_double(e.fit->ci_hi);
        else
            os << "nan,nan,nan";
        os << ',' << e.status << '\n';
    }
}

inline void write_profile_csv(std::ostream& os, const SmoothedProfile& profile) {
    os << "index,alpha_smooth,ci_lo_smooth,ci_hi_smooth\n";
    for (std::size_t i = 0; i < profile.alpha.size(); ++i)
        os << i << ',' << format_double(profile.alpha[i]) << ','
           << format_double(profile.ci_lo[i]) << ',' << format_double(profile.ci_hi[i]) << '\n';
}

} // namespace spdpower
