#ifndef KGSPEC_TESTS_FIXTURES_HPP
#define KGSPEC_TESTS_FIXTURES_HPP

#include "kgspec/waves.hpp"

namespace fixture {

using kgspec::Branch;
using kgspec::WaveParameters;

// Sine-Gordon panels.
inline WaveParameters sg_sub_rot() { return {-0.5, 0.5, kgspec::sine_gordon(), Branch::RotationalPlus}; }
inline WaveParameters sg_sub_lib() { return {0.5, 0.5, kgspec::sine_gordon(), Branch::RightWell}; }
inline WaveParameters sg_super_rot() { return {6.0, 1.45, kgspec::sine_gordon(), Branch::RotationalPlus}; }
inline WaveParameters sg_super_lib() { return {1.5, 2.0, kgspec::sine_gordon(), Branch::RightWell}; }

// phi^4 wave with the theta-tracked Hopf sequence.
inline WaveParameters phi4_tracked() { return {-0.082875, 0.95, kgspec::phi4(), Branch::RightWell}; }

inline kgspec::WaveProfile profile(const WaveParameters& p, std::size_t n = 257) { return kgspec::wave_profile(p, n); }

}  // namespace fixture

#endif  // KGSPEC_TESTS_FIXTURES_HPP
