#include "cflow/tri_mesh.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cflow {

std::unique_ptr<TriMesh> read_obj(const std::string &path, int genus, MeshRemeshPolicy policy)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open OBJ file " + path);
    std::vector<Vector3> verts;
    std::vector<Face> faces;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vector3 p;
            if (!(ls >> p.x() >> p.y() >> p.z()))
                throw IoError(path + ":" + std::to_string(lineno) + ": bad vertex record");
            verts.push_back(p);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ls >> tok) {
                int k = std::stoi(tok.substr(0, tok.find('/')));
                idx.push_back(k > 0 ? k - 1 : int(verts.size()) + k);
            }
            if (idx.size() < 3) throw IoError(path + ":" + std::to_string(lineno) + ": face with < 3 vertices");
            for (size_t k = 1; k + 1 < idx.size(); ++k) faces.push_back({idx[0], idx[k], idx[k + 1]});
        }
    }
    return std::make_unique<TriMesh>(std::move(verts), std::move(faces), genus, policy);
}

void write_obj(const TriMesh &mesh, const std::string &path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    char buf[128];
    for (const Vector3 &p : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    for (const Face &f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

}  // namespace cflow
