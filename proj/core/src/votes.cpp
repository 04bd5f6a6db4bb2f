#include "plenopose/votes.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "plenopose/errors.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace plenopose {

void CenterVoteField::validate() const {
    if (height < 1 || width < 1)
        throw ValidationError("CenterVoteField: non-positive dimensions");
    const std::size_t n = static_cast<std::size_t>(height) * width;
    if (offset_x.size() != n || offset_y.size() != n || confidence.size() != n)
        throw ValidationError("CenterVoteField: array sizes do not match dims");
    if (mask.height != height || mask.width != width)
        throw ValidationError("CenterVoteField: mask dims do not match");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(offset_x[i]) || !std::isfinite(offset_y[i]))
            throw ValidationError("CenterVoteField: non-finite offset");
        if (!(confidence[i] >= 0.0 && confidence[i] <= 1.0))
            throw ValidationError("CenterVoteField: confidence outside [0,1]");
    }
}

void store_votes(const CenterVoteField& votes, const fs::path& path) {
    votes.validate();
    json entries = json::array();
    for (int y = 0; y < votes.height; ++y)
        for (int x = 0; x < votes.width; ++x) {
            if (!votes.mask.at(y, x)) continue;
            const std::size_t i = votes.index(y, x);
            entries.push_back({{"x", x},
                               {"y", y},
                               {"hx", votes.offset_x[i]},
                               {"hy", votes.offset_y[i]},
                               {"b", votes.confidence[i]}});
        }
    json doc;
    doc["height"] = votes.height;
    doc["width"] = votes.width;
    doc["votes"] = std::move(entries);
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
    if (!out) throw ParseError("store_votes: failed to write " + path.string());
}

CenterVoteField load_votes(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_votes: missing " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("load_votes: malformed JSON: " + std::string(e.what()));
    }
    CenterVoteField votes;
    try {
        votes = CenterVoteField(doc.at("height").get<int>(),
                                doc.at("width").get<int>());
        for (const json& e : doc.at("votes")) {
            const int x = e.at("x").get<int>();
            const int y = e.at("y").get<int>();
            if (y < 0 || y >= votes.height || x < 0 || x >= votes.width)
                throw ParseError("load_votes: vote pixel (" +
                                 std::to_string(x) + "," + std::to_string(y) +
                                 ") outside image");
            const std::size_t i = votes.index(y, x);
            votes.offset_x[i] = e.at("hx").get<double>();
            votes.offset_y[i] = e.at("hy").get<double>();
            votes.confidence[i] = e.at("b").get<double>();
            votes.mask.at(y, x) = 1;
        }
    } catch (const json::exception& e) {
        throw ParseError("load_votes: missing field: " + std::string(e.what()));
    }
    votes.validate();
    return votes;
}

}  // namespace plenopose
