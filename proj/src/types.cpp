#include "lidarpaint/types.hpp"

#include <set>

#include "lidarpaint/errors.hpp"

namespace lidarpaint {

LabelTable::LabelTable(std::vector<LabelEntry> entries) : entries_(std::move(entries)) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].id != static_cast<int>(i) + 1)
            throw InputError("label ids must be dense starting at 1");
        if (!names.insert(entries_[i].name).second)
            throw InputError("duplicate label name: " + entries_[i].name);
        if (!(entries_[i].characteristic_length_m > 0.0))
            throw InputError("characteristic length must be positive");
    }
}

LabelTable LabelTable::default_table() {
    return LabelTable({{1, "car", 4.5},
                       {2, "truck", 7.0},
                       {3, "bus", 11.0},
                       {4, "trailer", 10.0},
                       {5, "construction_vehicle", 6.0},
                       {6, "pedestrian", 0.8},
                       {7, "motorcycle", 2.1},
                       {8, "bicycle", 1.7},
                       {9, "traffic_cone", 0.4},
                       {10, "barrier", 2.5}});
}

const LabelEntry& LabelTable::entry(int id) const {
    if (!contains(id)) throw InputError("label id out of range: " + std::to_string(id));
    return entries_[static_cast<std::size_t>(id) - 1];
}

}  // namespace lidarpaint
