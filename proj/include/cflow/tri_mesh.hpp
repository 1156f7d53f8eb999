// Closed oriented triangle meshes (n = 2). Per-vertex shape operator from a
// least-squares height fit over the 2-ring in the normal frame.
#ifndef CFLOW_TRI_MESH_HPP
#define CFLOW_TRI_MESH_HPP

#include "cflow/surface.hpp"

#include <array>
#include <vector>

namespace cflow {

using Face = std::array<int, 3>;

struct MeshRemeshPolicy {
    double min_ratio = 0.4;  // edge length / mean edge length
    double max_ratio = 2.5;
    double min_quality = 0.2;
    int fit_order = 4;  // polynomial degree of the height fit (2..4)

    bool operator==(const MeshRemeshPolicy &) const = default;
};

class TriMesh final : public Surface {
public:
    TriMesh(std::vector<Vector3> vertices, std::vector<Face> faces, int genus = 0, MeshRemeshPolicy policy = {});

    Representation representation() const override { return Representation::Mesh; }
    int dim() const override { return 2; }
    int size() const override { return int(m_vertices.size()); }
    const PointGeometry &point(int i) const override { return m_points.at(i); }
    double weight(int i) const override { return m_vertex_area.at(i); }
    double spacing_min() const override;

    GlobalGeometry global_geometry() const override;
    double inscribed_curvature(int i) const override;
    double exscribed_curvature(int i) const override;
    double curvature_gradient_norm(int i) const override;
    FieldDerivatives field_derivatives(const Vector &u, int i) const override;

    std::unique_ptr<Surface> displaced(const Vector &normal_displacement) const override;
    bool needs_remesh() const override;
    std::unique_ptr<Surface> remeshed() const override;
    std::unique_ptr<Surface> scaled(double lambda) const override;
    std::unique_ptr<Surface> clone() const override { return std::make_unique<TriMesh>(*this); }

    const std::vector<Vector3> &vertices() const { return m_vertices; }
    const std::vector<Face> &faces() const { return m_faces; }
    int genus() const { return m_genus; }
    const MeshRemeshPolicy &policy() const { return m_policy; }
    /// Principal directions as columns, in frame order.
    const Eigen::Matrix<double, 3, 2> &principal_frame(int i) const { return m_frame.at(i); }
    double mean_edge() const { return m_mean_edge; }
    /// min over faces of 4 sqrt(3) area / (sum of squared edges); 1 for equilateral.
    double min_quality() const;
    /// Signed Gauss integral sum K_i A_i.
    double gauss_integral() const;

    struct Topology {
        std::vector<std::vector<int>> ring1, ring2;
        int edges = 0;
    };

private:
    TriMesh(std::vector<Vector3> vertices, const TriMesh &parent);
    void build_topology();
    void build_geometry();
    void fit_vertex(int i);
    double chord_extreme(int i, bool upper) const;

    std::vector<Vector3> m_vertices;
    std::vector<Face> m_faces;
    int m_genus;
    MeshRemeshPolicy m_policy;
    std::shared_ptr<const Topology> m_topo;
    std::vector<double> m_vertex_area;
    std::vector<Vector3> m_area_normal;
    std::vector<PointGeometry> m_points;
    std::vector<Eigen::Matrix<double, 3, 2>> m_frame;
    std::vector<double> m_stencil;
    double m_mean_edge = 0.0;
};

/// Wavefront OBJ (v and f records only; polygons are fan-triangulated).
std::unique_ptr<TriMesh> read_obj(const std::string &path, int genus = 0, MeshRemeshPolicy policy = {});
void write_obj(const TriMesh &mesh, const std::string &path);

/// Smallest enclosing ball of a point set (Welzl, deterministic shuffle).
std::pair<Vector3, double> min_enclosing_ball(std::vector<Vector3> points, std::uint64_t seed = 1);

/// Closest distance from p to triangle (a, b, c).
double point_triangle_distance(const Vector3 &p, const Vector3 &a, const Vector3 &b, const Vector3 &c);

}  // namespace cflow

#endif
