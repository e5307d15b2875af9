#pragma once

#include <array>
#include <string>
#include <vector>

namespace humanizer {

/// Alpha-carbon backbone coordinates, one row per residue, in angstrom.
struct BackboneCoordinates {
  std::vector<std::array<double, 3>> coords;

  std::size_t length() const { return coords.size(); }
};

/// Reads coordinates from text: either 3 columns (x y z) per line or 4
/// columns (index x y z, alpha carbons only). Lines starting with '#' are
/// ignored.
BackboneCoordinates load_coordinates(const std::string& path);

void save_coordinates_xyz(const std::string& path, const BackboneCoordinates& coords);

/// Optimal rigid superposition (rotation + translation, no reflection) of
/// `mobile` onto `reference`, minimizing RMSD. Throws if the point sets are
/// degenerate (coincident or collinear) or have fewer than 3 points.
BackboneCoordinates kabsch_align(const BackboneCoordinates& mobile,
                                 const BackboneCoordinates& reference);

double rmsd(const BackboneCoordinates& a, const BackboneCoordinates& b);

/// Structural similarity score on coordinates that are already superposed:
/// -(1/(9 L^2)) * ||candidate - starter||_Frobenius. Zero iff identical,
/// strictly negative otherwise.
double structure_score_prealigned(const BackboneCoordinates& candidate,
                                  const BackboneCoordinates& starter);

/// Kabsch-aligns the candidate to the starter, then applies the norm score.
double structure_score(const BackboneCoordinates& candidate,
                       const BackboneCoordinates& starter);

}  // namespace humanizer
