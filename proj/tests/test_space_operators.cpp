#include <doctest.h>

#include "polburst/operators.hpp"

using namespace polburst;

namespace {

SpaceLayout three_part()
{
    return SpaceLayout::compose({{"a", 2}, {"b", 3}, {"c", 2}});
}

Matrix random_hermitian(int n, unsigned seed)
{
    std::srand(seed);
    Matrix m = Matrix::Random(n, n);
    return 0.5 * (m + m.adjoint());
}

} // namespace

TEST_CASE("layout composition and lookups")
{
    SpaceLayout layout = three_part();
    CHECK(layout.total_dim() == 12);
    CHECK(layout.index_of("b") == 1);
    CHECK(layout.dim_of("c") == 2);
    CHECK(layout.has("a"));
    CHECK(!layout.has("z"));
    CHECK(layout.dim_before(1) == 2);
    CHECK(layout.dim_after(1) == 2);
    CHECK_THROWS_AS(layout.index_of("z"), std::invalid_argument);
    CHECK_THROWS_AS(SpaceLayout::compose({{"a", 2}, {"a", 3}}), std::invalid_argument);
    CHECK_THROWS_AS(SpaceLayout::compose({{"a", 0}}), std::invalid_argument);
}

TEST_CASE("embed matches explicit Kronecker product")
{
    SpaceLayout layout = three_part();
    Matrix a = random_hermitian(3, 7);
    Operator embedded = embed(Operator(single_space("b", 3), a), "b", layout);
    Matrix expected = kron(kron(Matrix::Identity(2, 2), a), Matrix::Identity(2, 2));
    CHECK((embedded.elements() - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(embedded.is_hermitian());
}

TEST_CASE("composite index follows row-major subsystem order")
{
    SpaceLayout layout = three_part();
    CHECK(composite_index(layout, {0, 0, 0}) == 0);
    CHECK(composite_index(layout, {0, 0, 1}) == 1);
    CHECK(composite_index(layout, {0, 1, 0}) == 2);
    CHECK(composite_index(layout, {1, 0, 0}) == 6);
    CHECK(composite_index(layout, {1, 2, 1}) == 11);
}

TEST_CASE("fock lowering operator")
{
    Operator a = fock_lowering(4);
    CHECK(a.elements()(0, 1) == Complex(1.0, 0.0));
    CHECK(std::abs(a.elements()(1, 2).real() - std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(a.elements()(2, 3).real() - std::sqrt(3.0)) < 1e-15);
    Matrix num = (a.adjoint() * a).elements();
    for (int n = 0; n < 4; ++n) CHECK(std::abs(num(n, n).real() - n) < 1e-14);
}

TEST_CASE("expectation value")
{
    SpaceLayout layout = single_space("s", 2);
    Vector ket(2);
    ket << std::sqrt(0.25), std::sqrt(0.75);
    DensityMatrix rho = DensityMatrix::pure(layout, ket);
    Matrix sz(2, 2);
    sz << 1.0, 0.0, 0.0, -1.0;
    CHECK(std::abs(expectation(rho, Operator(layout, sz)).real() - (-0.5)) < 1e-14);
}

TEST_CASE("partial trace of a product state recovers the factors")
{
    SpaceLayout layout = SpaceLayout::compose({{"a", 2}, {"b", 3}});
    Matrix ra(2, 2), rb(3, 3);
    ra << 0.7, 0.1, 0.1, 0.3;
    rb = Matrix::Zero(3, 3);
    rb(0, 0) = 0.5;
    rb(1, 1) = 0.3;
    rb(2, 2) = 0.2;
    DensityMatrix rho(layout, kron(ra, rb));
    DensityMatrix only_a = partial_trace(rho, {"b"});
    DensityMatrix only_b = partial_trace(rho, {"a"});
    CHECK((only_a.elements() - ra).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((only_b.elements() - rb).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("partial trace of a Bell state is maximally mixed")
{
    SpaceLayout layout = SpaceLayout::compose({{"a", 2}, {"b", 2}});
    Vector bell = Vector::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    DensityMatrix rho = DensityMatrix::pure(layout, bell);
    DensityMatrix reduced = partial_trace(rho, {"b"});
    CHECK((reduced.elements() - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("density matrix validation")
{
    SpaceLayout layout = single_space("s", 2);
    Matrix bad_trace = 2.0 * Matrix::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix(layout, bad_trace), std::invalid_argument);
    Matrix non_herm(2, 2);
    non_herm << 0.5, 0.3, 0.0, 0.5;
    CHECK_THROWS_AS(DensityMatrix(layout, non_herm), std::invalid_argument);
    Matrix neg(2, 2);
    neg << 1.5, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(DensityMatrix(layout, neg), std::invalid_argument);
}
