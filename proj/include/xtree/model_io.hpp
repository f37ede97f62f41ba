#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "xtree/hsm.hpp"
#include "xtree/plt.hpp"

namespace xtree {

enum class Algo { Plt, Hsm };

// Self-contained model file: "XTPLT" magic and format version, algo tag, a
// hyperparameter echo, the tree text block, the representation header, and
// one binary section (little-endian fixed-width numerics) holding the idf
// table, embedding matrix and node classifiers. Saving is deterministic, so
// save -> load -> save is byte-identical.
struct ModelBundle {
    Algo algo = Algo::Plt;
    LabelTree tree;
    Representation repr;
    std::vector<NodeModel> nodes;
    std::map<std::string, std::string> hyper;
};

void save_model(std::ostream& out, const ModelBundle& bundle);
void save_model(const std::string& path, const ModelBundle& bundle);

ModelBundle load_model(std::istream& in);  // rejects unknown versions
ModelBundle load_model(const std::string& path);

ModelBundle bundle_plt(const PltModel& model, std::map<std::string, std::string> hyper = {});
ModelBundle bundle_hsm(const HsmModel& model, std::map<std::string, std::string> hyper = {});
PltModel to_plt(ModelBundle bundle);
HsmModel to_hsm(ModelBundle bundle);

}  // namespace xtree
