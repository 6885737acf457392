"""intcalc: labelled and nested sequent calculi for intuitionistic logics.

The package implements the labelled calculi G3Int / G3IntQC and the nested
calculi NInt / NIntQC together with their starred variants, an executable
finite Kripke semantics with constant domains, a Hilbert-system checker,
graph-based translation between labelled and nested sequents, backward
proof search, and the structural-rule-elimination pipeline that rewrites
labelled derivations into nested ones.
"""

from .formula import (
    And,
    Atom,
    Bot,
    Exists,
    Forall,
    Formula,
    FormulaError,
    Impl,
    Neg,
    Or,
    Param,
    Var,
    complexity,
    convert_signature,
    parse_formula,
    show_formula,
    substitute_param,
)
from .kripke import (
    KripkeModel,
    enumerate_models,
    labelled_sequent_holds,
    load_model,
    dump_model,
    nested_sequent_holds,
    satisfies,
)
from .hilbert import HilbertDerivation, check_hilbert, dump_hilbert, parse_hilbert
from .labelled import (
    DomAtom,
    Label,
    LabelledDerivation,
    LabelledSequent,
    RelAtom,
    Rule,
    Witness,
    apply_backward,
    check_derivation,
    check_inference,
    parse_sequent,
    path_exists,
    show_sequent,
    substitute_sequent,
)
from .nested import (
    NRule,
    NWitness,
    NestedDerivation,
    NestedSequent,
    apply_nested_backward,
    check_nested_derivation,
    check_nested_inference,
    parse_nested,
    show_nested,
)
from .graph import (
    SequentGraph,
    graph_of_labelled,
    graph_of_nested,
    is_treelike,
    isomorphic,
    labelify,
    nestify,
)
from .transform import (
    TransformReport,
    contract_derivation,
    eliminate_nd_cd,
    eliminate_ref,
    eliminate_structural,
    eliminate_tra,
    expand_derived_rules,
    invert_derivation,
    proof_to_nested,
    substitute_derivation,
    weaken_derivation,
)
from .search import (
    Countermodel,
    Decision,
    SearchConfig,
    decide_prop,
    find_countermodel,
    prove,
)

__version__ = "0.1.0"
