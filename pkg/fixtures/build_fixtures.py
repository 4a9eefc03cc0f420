"""Regenerate the checked-in fixture documents from their Python definitions.

Run from the repository root:  python fixtures/build_fixtures.py
"""

from __future__ import annotations

import pathlib

from tggkit import documents
from tggkit.graph import (
    CorrLink,
    CorrType,
    Domain,
    Edge,
    EdgeType,
    Metamodel,
    Node,
    NodeType,
    TripleGraph,
    TripleMetamodel,
    UpperBound,
)
from tggkit.rules import Grammar, RuleAnnotation, TGGRule

HERE = pathlib.Path(__file__).resolve().parent

GREEN = RuleAnnotation.GREEN
BLACK = RuleAnnotation.BLACK
SRC = Domain.SOURCE
TGT = Domain.TARGET


def company_to_it_metamodel() -> TripleMetamodel:
    company = Metamodel(
        "Company",
        node_types=[
            NodeType("Person", abstract=True),
            NodeType("Company"),
            NodeType("CEO"),
            NodeType("Admin", supertype="Person"),
            NodeType("Employee", supertype="Person"),
        ],
        edge_types=[
            EdgeType("admins", "Company", "Admin", UpperBound.MANY),
            EdgeType("employees", "Company", "Employee", UpperBound.MANY),
            EdgeType("ceo", "Company", "CEO", UpperBound.ONE),
            EdgeType("reportsTo", "Person", "CEO", UpperBound.ONE),
        ],
    )
    it = Metamodel(
        "IT",
        node_types=[
            NodeType("IT"),
            NodeType("Network"),
            NodeType("Router"),
            NodeType("PC"),
            NodeType("Laptop"),
        ],
        edge_types=[
            EdgeType("networks", "IT", "Network", UpperBound.MANY),
            EdgeType("routers", "Network", "Router", UpperBound.MANY),
            EdgeType("pcs", "Network", "PC", UpperBound.MANY),
            EdgeType("laptops", "Network", "Laptop", UpperBound.MANY),
            EdgeType("assignedTo", "Router", "Network", UpperBound.ONE),
        ],
    )
    corr_types = [
        CorrType("CompanyToITCorr", "Company", "IT"),
        CorrType("AdminToRouterCorr", "Admin", "Router"),
        CorrType("EmployeeToPCCorr", "Employee", "PC"),
        CorrType("EmployeeToLaptopCorr", "Employee", "Laptop"),
    ]
    return TripleMetamodel("CompanyToIT", company, it, corr_types)


def _rule(name: str, nodes, edges, corrs, annotations) -> TGGRule:
    pattern = TripleGraph.build(nodes=nodes, edges=edges, corrs=corrs)
    return TGGRule(name=name, elements=pattern, annotations=annotations)


def company_to_it_grammar() -> Grammar:
    axiom = _rule(
        "CompanyToITRule",
        nodes=[
            (Node("company", "Company"), SRC),
            (Node("ceo", "CEO"), SRC),
            (Node("it", "IT"), TGT),
        ],
        edges=[(Edge("ceoEdge", "ceo", "company", "ceo"), SRC)],
        corrs=[CorrLink("companyIt", "CompanyToITCorr", "company", "it")],
        annotations={
            "company": GREEN,
            "ceo": GREEN,
            "ceoEdge": GREEN,
            "it": GREEN,
            "companyIt": GREEN,
        },
    )

    shared_context_nodes = [
        (Node("company", "Company"), SRC),
        (Node("ceo", "CEO"), SRC),
        (Node("it", "IT"), TGT),
    ]
    shared_context_edges = [(Edge("ceoEdge", "ceo", "company", "ceo"), SRC)]
    shared_context_corrs = [CorrLink("companyIt", "CompanyToITCorr", "company", "it")]
    shared_context_annotations = {
        "company": BLACK,
        "ceo": BLACK,
        "ceoEdge": BLACK,
        "it": BLACK,
        "companyIt": BLACK,
    }

    admin = _rule(
        "AdminToRouterRule",
        nodes=shared_context_nodes + [(Node("admin", "Admin"), SRC), (Node("network", "Network"), TGT), (Node("router", "Router"), TGT)],
        edges=shared_context_edges
        + [
            (Edge("adminsEdge", "admins", "company", "admin"), SRC),
            (Edge("reportsToEdge", "reportsTo", "admin", "ceo"), SRC),
            (Edge("networksEdge", "networks", "it", "network"), TGT),
            (Edge("routersEdge", "routers", "network", "router"), TGT),
            (Edge("assignedToEdge", "assignedTo", "router", "network"), TGT),
        ],
        corrs=shared_context_corrs + [CorrLink("adminRouter", "AdminToRouterCorr", "admin", "router")],
        annotations={
            **shared_context_annotations,
            "admin": GREEN,
            "adminsEdge": GREEN,
            "reportsToEdge": GREEN,
            "network": GREEN,
            "networksEdge": GREEN,
            "router": GREEN,
            "routersEdge": GREEN,
            "assignedToEdge": GREEN,
            "adminRouter": GREEN,
        },
    )

    def employee_rule(name: str, device_type: str, edge_type: str, corr_type: str) -> TGGRule:
        return _rule(
            name,
            nodes=shared_context_nodes
            + [
                (Node("network", "Network"), TGT),
                (Node("employee", "Employee"), SRC),
                (Node("device", device_type), TGT),
            ],
            edges=shared_context_edges
            + [
                (Edge("networksEdge", "networks", "it", "network"), TGT),
                (Edge("employeesEdge", "employees", "company", "employee"), SRC),
                (Edge("reportsToEdge", "reportsTo", "employee", "ceo"), SRC),
                (Edge("deviceEdge", edge_type, "network", "device"), TGT),
            ],
            corrs=shared_context_corrs + [CorrLink("employeeDevice", corr_type, "employee", "device")],
            annotations={
                **shared_context_annotations,
                "network": BLACK,
                "networksEdge": BLACK,
                "employee": GREEN,
                "employeesEdge": GREEN,
                "reportsToEdge": GREEN,
                "device": GREEN,
                "deviceEdge": GREEN,
                "employeeDevice": GREEN,
            },
        )

    pc = employee_rule("EmployeeToPCRule", "PC", "pcs", "EmployeeToPCCorr")
    laptop = employee_rule("EmployeeToLaptopRule", "Laptop", "laptops", "EmployeeToLaptopCorr")

    return Grammar(
        name="CompanyToIT",
        metamodel=company_to_it_metamodel(),
        rules=(axiom, admin, pc, laptop),
    )


def two_admins_one_employee() -> TripleGraph:
    return TripleGraph.build(
        nodes=[
            (Node("c1", "Company"), SRC),
            (Node("ceo1", "CEO"), SRC),
            (Node("a1", "Admin"), SRC),
            (Node("a2", "Admin"), SRC),
            (Node("emp1", "Employee"), SRC),
        ],
        edges=[
            (Edge("ed1", "ceo", "c1", "ceo1"), SRC),
            (Edge("ed2", "admins", "c1", "a1"), SRC),
            (Edge("ed3", "admins", "c1", "a2"), SRC),
            (Edge("ed4", "employees", "c1", "emp1"), SRC),
            (Edge("ed5", "reportsTo", "a1", "ceo1"), SRC),
            (Edge("ed6", "reportsTo", "a2", "ceo1"), SRC),
            (Edge("ed7", "reportsTo", "emp1", "ceo1"), SRC),
        ],
    )


def main() -> None:
    grammar = company_to_it_grammar()
    documents.save_path(grammar.metamodel, HERE / "companytoit.metamodel.json")
    documents.save_path(grammar, HERE / "companytoit.ruleset.json")
    documents.save_path(two_admins_one_employee(), HERE / "two_admins_one_employee.triple.json")
    print(f"wrote fixtures to {HERE}")


if __name__ == "__main__":
    main()
