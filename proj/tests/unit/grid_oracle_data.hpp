#pragma once

// Reader for the frozen grid-search oracle produced by
// tests/oracles/grid_oracle.py.

#include "dpdsis/types.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

struct GridOracleInstance {
    int id = 0;
    double alpha = 0.0;
    double grid_min = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
    double sigma = 0.0;
    dpdsis::Vector x;
    dpdsis::Vector y;
};

inline std::vector<GridOracleInstance> load_grid_oracle(const std::string& path = std::string(DPDSIS_TEST_DATA_DIR) +
                                                                                  "/grid_oracle.tsv") {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::vector<GridOracleInstance> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream cells(line);
        GridOracleInstance inst;
        cells >> inst.id >> inst.alpha >> inst.grid_min >> inst.gamma >> inst.beta >> inst.sigma;
        inst.x.resize(20);
        inst.y.resize(20);
        for (int i = 0; i < 20; ++i) cells >> inst.x[i];
        for (int i = 0; i < 20; ++i) cells >> inst.y[i];
        if (!cells) {
            throw std::runtime_error("malformed grid oracle row");
        }
        out.push_back(std::move(inst));
    }
    return out;
}

}  // namespace testutil
