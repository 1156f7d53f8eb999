// Initial surfaces: spheres, ellipsoids, capsules and dumbbells as profiles
// (any n) or meshes (n = 2), tori and OBJ input as meshes.
#ifndef CFLOW_SHAPES_HPP
#define CFLOW_SHAPES_HPP

#include "cflow/profile_surface.hpp"
#include "cflow/tri_mesh.hpp"

#include <string>
#include <vector>

namespace cflow {

struct ShapeSpec {
    std::string kind = "sphere";  // sphere | ellipsoid | capsule | dumbbell | torus | obj
    std::string representation = "profile";  // profile | mesh
    int n = 2;
    int resolution = 200;  // profile segments, icosphere level, or torus rings
    double radius = 1.0;  // sphere, capsule, dumbbell bulb, torus tube centre distance
    std::vector<double> axes{2.0, 1.0, 1.0};  // ellipsoid semi-axes, first along the rotation axis
    double length = 1.0;  // capsule: half length of the cylinder; dumbbell: half length a
    double neck_depth = 0.7;  // dumbbell d
    double neck_width = 0.6;  // dumbbell w
    double tube = 1.0;  // torus tube radius
    std::string path;  // obj input
    int genus = 0;  // obj input
    ProfileRemeshPolicy profile_policy;
    MeshRemeshPolicy mesh_policy;

    bool operator==(const ShapeSpec &) const = default;
};

std::vector<std::string> shape_catalog();

/// Validate and build. Throws ConfigError for bad parameters.
std::unique_ptr<Surface> make_shape(const ShapeSpec &spec);

std::unique_ptr<ProfileSurface> profile_sphere(int n, double R, int segments, ProfileRemeshPolicy policy = {});
std::unique_ptr<ProfileSurface> profile_ellipsoid(int n, double axial, double radial, int segments,
                                                  ProfileRemeshPolicy policy = {});
std::unique_ptr<TriMesh> icosphere(int level, double R, MeshRemeshPolicy policy = {});
std::unique_ptr<TriMesh> mesh_ellipsoid(int level, double a, double b, double c, MeshRemeshPolicy policy = {});
std::unique_ptr<TriMesh> mesh_torus(double R, double rho, int rings, int sides, MeshRemeshPolicy policy = {});

}  // namespace cflow

#endif
