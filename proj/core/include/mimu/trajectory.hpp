#ifndef MIMU_TRAJECTORY_HPP
#define MIMU_TRAJECTORY_HPP

#include <cstddef>
#include <vector>

#include "mimu/errors.hpp"
#include "mimu/types.hpp"

namespace mimu {

// Timestamped Master-frame orientations R_{W<-M}(t_k), estimate or ground truth.
struct OrientationTrajectory {
  std::vector<double> timestamps;
  std::vector<Rotation> rotations;

  std::size_t size() const { return timestamps.size(); }
  bool empty() const { return timestamps.empty(); }

  void push_back(double t, const Rotation& r) {
    timestamps.push_back(t);
    rotations.push_back(r);
  }

  void validate() const {
    if (timestamps.size() != rotations.size())
      throw LengthMismatch("trajectory: timestamps and rotations differ in length");
    for (std::size_t i = 1; i < timestamps.size(); ++i)
      if (!(timestamps[i] > timestamps[i - 1]))
        throw NonMonotonicTime("trajectory: timestamps must be strictly increasing");
  }
};

}  // namespace mimu

#endif
