#ifndef CONFCLUST_TABLE_FIXTURES_HPP
#define CONFCLUST_TABLE_FIXTURES_HPP

#include "confclust/eval.hpp"

#include <vector>

namespace fixtures {

using confclust::Count;

using Rows = std::vector<std::vector<Count>>;

// Primary clustering for gamma 5%, k' 20 (867 remaining points).
inline const Rows kPrimary{
    {0, 0, 0, 0, 465, 0},
    {4, 783, 0, 0, 3, 1},
    {0, 0, 0, 889, 14, 0},
    {0, 1, 0, 0, 1, 650},
    {917, 6, 0, 0, 0, 0},
    {0, 0, 174, 0, 0, 0},
};
inline const std::vector<double> kPrimaryPrinted{0, 0.01, 0.015, 0.003, 0.006, 0};

// Post-majority clustering (69 remaining points).
inline const Rows kPostMajority{
    {3, 1, 13, 1, 724, 1},
    {4, 879, 0, 0, 5, 9},
    {0, 0, 0, 951, 33, 1},
    {0, 6, 0, 0, 2, 728},
    {1009, 22, 2, 1, 0, 0},
    {0, 0, 237, 0, 42, 0},
};
inline const std::vector<double> kPostMajorityPrinted{0.02, 0.02, 0.034, 0.0135, 0.024, 0.15};

// Graph-based reference clustering at resolution 0.4.
inline const Rows kReference{
    {1013, 6, 2, 1, 0, 1},
    {0, 0, 3, 954, 30, 0},
    {3, 3, 2, 0, 3, 732},
    {0, 485, 0, 0, 4, 1},
    {4, 430, 0, 0, 0, 9},
    {0, 0, 0, 0, 410, 0},
    {0, 0, 236, 0, 100, 0},
    {2, 0, 17, 0, 259, 0},
    {0, 0, 0, 0, 33, 0},
};
inline const std::vector<double> kReferencePrinted{0.00978, 0.0334, 0.0148, 0.0102, 0.0293, 0, 0.297, 0.0683, 0};

// Per-row errors computed independently from the counts.
inline const std::vector<double> kPrimaryExact{0, 0.010113780025284402, 0.015503875968992276,
                                               0.0030674846625766694, 0.00650054171180936, 0};
inline const std::vector<double> kReferenceExact{0.0097751710654936375, 0.033434650455927084, 0.014804845222072704,
                                                 0.010204081632653073, 0.029345372460496622, 0,
                                                 0.29761904761904767, 0.068345323741007213, 0};

} // namespace fixtures

#endif
