#pragma once

#include <array>
#include <string>
#include <vector>

#include "timegraphs/snapshot.hpp"

namespace timegraphs {

// One labeled sequence: ordered snapshots plus the set of active category
// names per frame.
struct Sequence {
    int seq_id = 0;
    std::vector<SnapshotGraph> snapshots;
    std::vector<std::vector<std::string>> frame_labels;  // size == snapshots.size()
};

struct Dataset {
    std::vector<Sequence> sequences;
    std::vector<std::string> categories;

    std::vector<int> label_vector(const std::vector<std::string>& names) const;
};

// Loads a JSONL snapshot file plus a JSONL label file
// ({"seq": int, "frame": int, "labels": [names]}). Sequences are delimited
// inside the snapshot stream by a timestamp reset (t <= previous t starts a
// new sequence). When `declared_categories` is empty the category list is
// the sorted union of observed label names; otherwise every label must be
// declared.
Dataset load_dataset(const std::string& snapshot_path, const std::string& label_path,
                     const std::vector<std::string>& declared_categories = {});

void write_dataset(const Dataset& dataset, const std::string& snapshot_path,
                   const std::string& label_path);

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
    std::vector<std::string> warnings;
};

// Sequence-level disjoint split with a seeded shuffle; counts follow the
// largest-remainder rule so a 7:2:1 split of 10 sequences is exactly 7/2/1.
SplitResult split(const Dataset& dataset, const std::array<double, 3>& ratios, uint64_t seed);

struct WindowSample {
    std::vector<SnapshotGraph> snapshots;
    std::vector<int> label;  // over dataset categories
    int future_offset = 0;
};

// Standard mode: fixed windows at the given stride, label read
// future_offset frames past the window end; windows whose label frame falls
// beyond the sequence are dropped. Growing mode: prefixes of length 1..n,
// labeled with the union of the sequence's frame labels (outcome-style).
std::vector<WindowSample> slice_windows(const Sequence& sequence,
                                        const std::vector<std::string>& categories,
                                        int window_frames, int stride, int future_offset,
                                        bool growing = false);

}  // namespace timegraphs
