#pragma once

#include "momentbound/assembly.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace momentbound {

// Solver-facing form of a moment problem: a linear objective, equality rows
// and PSD-valued affine maps over one flat variable space. Coefficients stay
// exact so the canonical export is lossless; floats are derived on demand.
struct ConicProblem {
    struct Row {
        std::map<long, Rat> coeffs;
        Rat rhs;
        std::string label;
    };
    struct PsdBlock {
        int side = 0;
        std::string id;
        // (row, col) with row <= col -> sparse linear form
        std::map<std::pair<int, int>, LinearForm> entries;
    };

    long num_vars = 0;
    std::map<long, Rat> objective;
    std::vector<Row> equalities;
    std::vector<PsdBlock> psd_blocks;
    std::vector<std::string> block_metadata;

    static ConicProblem from_moment_problem(const MomentProblem& mp) {
        ConicProblem cp;
        cp.num_vars = mp.num_vars();
        cp.objective = mp.objective;
        cp.equalities.reserve(mp.equalities.size());
        for (const auto& row : mp.equalities) cp.equalities.push_back({row.coeffs, row.rhs, row.label});
        cp.psd_blocks.reserve(mp.psd_maps.size());
        for (const auto& map : mp.psd_maps) {
            PsdBlock b;
            b.side = map.side;
            b.id = map.id;
            b.entries = map.entries;
            cp.psd_blocks.push_back(std::move(b));
        }
        for (const auto& blk : mp.blocks)
            cp.block_metadata.push_back(blk.id + ":r=" + std::to_string(blk.basis.size()) +
                                        ":d=" + std::to_string(blk.basis.degree()));
        return cp;
    }
};

namespace detail {

inline nlohmann::ordered_json rat_pair_json(const Rat& r) {
    return nlohmann::ordered_json::array({numerator(r).convert_to<std::string>(),
                                          denominator(r).convert_to<std::string>()});
}

inline Rat rat_from_pair(const nlohmann::json& j) {
    return Rat(bigint_from_decimal(j.at(0).get<std::string>()), bigint_from_decimal(j.at(1).get<std::string>()));
}

}  // namespace detail

// momsdp-v1 interchange document. Indices are 0-based, PSD entries are listed
// for row <= col only in row-major order, numerators and denominators are
// decimal strings so the document is exact and byte-stable for fingerprints.
inline std::string export_canonical(const ConicProblem& cp) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["version"] = "momsdp-v1";
    doc["n_vars"] = cp.num_vars;

    json obj = json::array();
    for (const auto& [idx, c] : cp.objective) {
        json t = json::array();
        t.push_back(idx);
        t.push_back(numerator(c).convert_to<std::string>());
        t.push_back(denominator(c).convert_to<std::string>());
        obj.push_back(std::move(t));
    }
    doc["objective"] = std::move(obj);

    json eqs = json::array();
    for (const auto& row : cp.equalities) {
        json r;
        json coeffs = json::array();
        for (const auto& [idx, c] : row.coeffs) {
            json t = json::array();
            t.push_back(idx);
            t.push_back(numerator(c).convert_to<std::string>());
            t.push_back(denominator(c).convert_to<std::string>());
            coeffs.push_back(std::move(t));
        }
        r["coeffs"] = std::move(coeffs);
        r["rhs"] = detail::rat_pair_json(row.rhs);
        r["label"] = row.label;
        eqs.push_back(std::move(r));
    }
    doc["equalities"] = std::move(eqs);

    json blocks = json::array();
    for (const auto& blk : cp.psd_blocks) {
        json b;
        b["side"] = blk.side;
        b["id"] = blk.id;
        json entries = json::array();
        for (const auto& [rc, form] : blk.entries) {
            // forms are kept index-ascending
            std::map<long, Rat> sorted;
            for (const auto& [idx, c] : form) sorted[idx] += c;
            for (const auto& [idx, c] : sorted) {
                if (c == 0) continue;
                json t = json::array();
                t.push_back(rc.first);
                t.push_back(rc.second);
                t.push_back(idx);
                t.push_back(numerator(c).convert_to<std::string>());
                t.push_back(denominator(c).convert_to<std::string>());
                entries.push_back(std::move(t));
            }
        }
        b["entries"] = std::move(entries);
        blocks.push_back(std::move(b));
    }
    doc["psd_blocks"] = std::move(blocks);
    doc["block_metadata"] = cp.block_metadata;
    return doc.dump();
}

inline ConicProblem parse_canonical(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.at("version").get<std::string>() != "momsdp-v1")
        throw std::invalid_argument("parse_canonical: unsupported version");
    ConicProblem cp;
    cp.num_vars = doc.at("n_vars").get<long>();
    for (const auto& t : doc.at("objective"))
        cp.objective[t.at(0).get<long>()] =
            Rat(bigint_from_decimal(t.at(1).get<std::string>()), bigint_from_decimal(t.at(2).get<std::string>()));
    for (const auto& r : doc.at("equalities")) {
        ConicProblem::Row row;
        for (const auto& t : r.at("coeffs"))
            row.coeffs[t.at(0).get<long>()] =
                Rat(bigint_from_decimal(t.at(1).get<std::string>()), bigint_from_decimal(t.at(2).get<std::string>()));
        row.rhs = detail::rat_from_pair(r.at("rhs"));
        row.label = r.at("label").get<std::string>();
        cp.equalities.push_back(std::move(row));
    }
    for (const auto& b : doc.at("psd_blocks")) {
        ConicProblem::PsdBlock blk;
        blk.side = b.at("side").get<int>();
        blk.id = b.at("id").get<std::string>();
        for (const auto& t : b.at("entries")) {
            std::pair<int, int> rc{t.at(0).get<int>(), t.at(1).get<int>()};
            blk.entries[rc].emplace_back(
                t.at(2).get<long>(),
                Rat(bigint_from_decimal(t.at(3).get<std::string>()), bigint_from_decimal(t.at(4).get<std::string>())));
        }
        cp.psd_blocks.push_back(std::move(blk));
    }
    for (const auto& s : doc.at("block_metadata")) cp.block_metadata.push_back(s.get<std::string>());
    return cp;
}

// FNV-1a over the canonical export; stable across runs by construction.
inline std::string fingerprint(const std::string& canonical_text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string fingerprint(const ConicProblem& cp) { return fingerprint(export_canonical(cp)); }

}  // namespace momentbound
