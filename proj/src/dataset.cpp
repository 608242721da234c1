#include "timegraphs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "timegraphs/error.hpp"
#include "timegraphs/rng.hpp"

namespace timegraphs {

std::vector<int> Dataset::label_vector(const std::vector<std::string>& names) const {
    std::vector<int> y(categories.size(), 0);
    for (const auto& name : names) {
        auto it = std::find(categories.begin(), categories.end(), name);
        if (it == categories.end()) throw schema_error("label not in category list: " + name);
        y[static_cast<size_t>(it - categories.begin())] = 1;
    }
    return y;
}

Dataset load_dataset(const std::string& snapshot_path, const std::string& label_path,
                     const std::vector<std::string>& declared_categories) {
    Dataset ds;
    auto snapshots = read_snapshot_jsonl_file(snapshot_path);

    // Timestamp resets delimit sequences.
    double prev_t = 0.0;
    bool first = true;
    for (auto& snap : snapshots) {
        if (first || snap.timestamp <= prev_t) {
            Sequence seq;
            seq.seq_id = static_cast<int>(ds.sequences.size());
            ds.sequences.push_back(std::move(seq));
        }
        prev_t = snap.timestamp;
        first = false;
        ds.sequences.back().snapshots.push_back(std::move(snap));
    }
    for (auto& seq : ds.sequences) seq.frame_labels.resize(seq.snapshots.size());

    std::ifstream in(label_path);
    if (!in) throw io_error("cannot open: " + label_path);
    std::set<std::string> seen_names;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("label line " + std::to_string(lineno) + ": " + e.what());
        }
        int seq = j.at("seq").get<int>();
        int frame = j.at("frame").get<int>();
        auto labels = j.at("labels").get<std::vector<std::string>>();
        if (seq < 0 || seq >= static_cast<int>(ds.sequences.size()))
            throw schema_error("label line " + std::to_string(lineno) + ": unknown sequence " +
                               std::to_string(seq));
        auto& target = ds.sequences[seq];
        if (frame < 0 || frame >= static_cast<int>(target.snapshots.size()))
            throw schema_error("label line " + std::to_string(lineno) + ": frame " +
                               std::to_string(frame) + " outside sequence " + std::to_string(seq));
        for (const auto& name : labels) {
            seen_names.insert(name);
            target.frame_labels[frame].push_back(name);
        }
    }

    if (declared_categories.empty()) {
        ds.categories.assign(seen_names.begin(), seen_names.end());
    } else {
        ds.categories = declared_categories;
        for (const auto& name : seen_names)
            if (std::find(ds.categories.begin(), ds.categories.end(), name) == ds.categories.end())
                throw schema_error("label \"" + name + "\" not among declared categories");
    }
    return ds;
}

void write_dataset(const Dataset& dataset, const std::string& snapshot_path,
                   const std::string& label_path) {
    std::ofstream snap_out(snapshot_path);
    if (!snap_out) throw io_error("cannot open for writing: " + snapshot_path);
    std::ofstream label_out(label_path);
    if (!label_out) throw io_error("cannot open for writing: " + label_path);
    for (const auto& seq : dataset.sequences) {
        write_snapshot_jsonl(snap_out, seq.snapshots);
        for (size_t f = 0; f < seq.frame_labels.size(); ++f) {
            if (seq.frame_labels[f].empty()) continue;
            nlohmann::json j = {{"seq", seq.seq_id},
                                {"frame", static_cast<int>(f)},
                                {"labels", seq.frame_labels[f]}};
            label_out << j.dump() << "\n";
        }
    }
}

SplitResult split(const Dataset& dataset, const std::array<double, 3>& ratios, uint64_t seed) {
    double total = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(total - 1.0) > 1e-9) throw config_error("split ratios must sum to 1");

    int n = static_cast<int>(dataset.sequences.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    // Largest remainder apportionment.
    std::array<int, 3> counts{};
    std::array<double, 3> frac{};
    int assigned = 0;
    for (int i = 0; i < 3; ++i) {
        double exact = ratios[i] * n;
        counts[i] = static_cast<int>(exact);
        frac[i] = exact - counts[i];
        assigned += counts[i];
    }
    while (assigned < n) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (frac[i] > frac[best]) best = i;
        ++counts[best];
        frac[best] = -1.0;
        ++assigned;
    }

    SplitResult result;
    Dataset* parts[3] = {&result.train, &result.val, &result.test};
    const char* names[3] = {"train", "val", "test"};
    int cursor = 0;
    for (int p = 0; p < 3; ++p) {
        parts[p]->categories = dataset.categories;
        for (int i = 0; i < counts[p]; ++i)
            parts[p]->sequences.push_back(dataset.sequences[order[cursor++]]);
        if (counts[p] == 0 && ratios[p] > 0.0)
            result.warnings.push_back(std::string("empty ") + names[p] +
                                      " split despite nonzero ratio");
    }
    return result;
}

std::vector<WindowSample> slice_windows(const Sequence& sequence,
                                        const std::vector<std::string>& categories,
                                        int window_frames, int stride, int future_offset,
                                        bool growing) {
    if (window_frames < 1) throw config_error("slice_windows: window_frames must be >= 1");
    if (stride < 1) throw config_error("slice_windows: stride must be >= 1");
    if (future_offset < 0) throw config_error("slice_windows: future_offset must be >= 0");

    Dataset scratch;
    scratch.categories = categories;
    int frames = static_cast<int>(sequence.snapshots.size());
    std::vector<WindowSample> out;

    if (growing) {
        std::set<std::string> all;
        for (const auto& fl : sequence.frame_labels) all.insert(fl.begin(), fl.end());
        std::vector<std::string> outcome(all.begin(), all.end());
        for (int len = 1; len <= frames; ++len) {
            WindowSample w;
            w.snapshots.assign(sequence.snapshots.begin(), sequence.snapshots.begin() + len);
            w.label = scratch.label_vector(outcome);
            w.future_offset = 0;
            out.push_back(std::move(w));
        }
        return out;
    }

    for (int start = 0; start + window_frames <= frames; start += stride) {
        int label_frame = start + window_frames - 1 + future_offset;
        if (label_frame >= frames) continue;  // window dropped
        WindowSample w;
        w.snapshots.assign(sequence.snapshots.begin() + start,
                           sequence.snapshots.begin() + start + window_frames);
        w.label = scratch.label_vector(sequence.frame_labels[label_frame]);
        w.future_offset = future_offset;
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace timegraphs
