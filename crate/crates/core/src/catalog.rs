//! Built-in catalog of named matrices and one qutrit product set.
//!
//! Every entry keeps the rows exactly as they were transcribed, the
//! corrections applied before parsing, and a list of machine-checkable
//! claims. Entries whose transcription could not be repaired convincingly
//! are marked suspect; the self-test reports them separately.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::constructions::maximality_status;
use crate::engine::{decomposition_probe, enumerate_orthogonal_rows, is_uom, max_mutually_orthogonal};
use crate::equivalence::are_equivalent;
use crate::formal::{is_orthogonal_matrix, parse_matrix, stats, FormalMatrix, ParseError, Var};
use crate::numeric::{pyramid_upb, qudit_orthogonal_product_vectors, QuditProductSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown catalog entry {0:?}")]
    UnknownEntry(String),
    #[error("entry {name}: {source}")]
    Parse { name: String, source: ParseError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceStatus {
    Verbatim,
    Repaired,
    Suspect,
}

/// How the transcribed text is corrected before parsing.
#[derive(Clone, Copy, Debug)]
enum Fix {
    None,
    /// Replace whole rows, matched exactly.
    Rows(&'static [(&'static str, &'static str)]),
    /// Keep the first copy of each repeated row.
    Dedup,
    /// Replace the whole text.
    Text(&'static str),
}

/// Rows orthogonal to the entry once `drop` (1-based) is removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Completions {
    pub drop: &'static [usize],
    /// In the entry's own notation, so names line up with the matrix.
    pub rows: &'static str,
    pub max_mutually_orthogonal: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Claims {
    pub size: Option<(usize, usize)>,
    pub orthogonal: Option<bool>,
    pub uom: Option<bool>,
    pub balanced: Option<bool>,
    /// Some column holds a single variable class.
    pub reducible: Option<bool>,
    pub decomposable: Option<bool>,
    pub maximal: Option<bool>,
    pub equivalent_to: Vec<&'static str>,
    pub inequivalent_to: Vec<&'static str>,
    pub completions: Option<Completions>,
    /// Qudit sets: local dimensions and number of states.
    pub dims: Option<Vec<usize>>,
    pub states: Option<usize>,
}

impl Claims {
    fn uom(m: usize, n: usize) -> Self {
        Claims { size: Some((m, n)), orthogonal: Some(true), uom: Some(true), ..Claims::default() }
    }

    fn orthogonal(m: usize, n: usize, uom: bool) -> Self {
        Claims { size: Some((m, n)), orthogonal: Some(true), uom: Some(uom), ..Claims::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatalogItem {
    Matrix { matrix: FormalMatrix },
    Qudit { set: QuditProductSet },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    /// Rows as transcribed.
    pub source: &'static str,
    /// Text that was parsed, after corrections.
    pub text: String,
    pub status: SourceStatus,
    pub notes: Vec<String>,
    pub claims: Claims,
    #[serde(flatten)]
    pub item: CatalogItem,
}

impl CatalogEntry {
    pub fn source_suspect(&self) -> bool {
        self.status == SourceStatus::Suspect
    }

    pub fn matrix(&self) -> Option<&FormalMatrix> {
        match &self.item {
            CatalogItem::Matrix { matrix } => Some(matrix),
            CatalogItem::Qudit { .. } => None,
        }
    }

    pub fn qudit(&self) -> Option<&QuditProductSet> {
        match &self.item {
            CatalogItem::Qudit { set } => Some(set),
            CatalogItem::Matrix { .. } => None,
        }
    }
}

struct Raw {
    name: &'static str,
    description: &'static str,
    source: &'static str,
    fix: Fix,
    suspect: Option<&'static str>,
    notes: &'static [&'static str],
    /// Correction to a claim rather than to the rows.
    extra: Option<&'static str>,
    claims: Claims,
}

impl Raw {
    fn new(name: &'static str, description: &'static str, source: &'static str, claims: Claims) -> Self {
        Raw { name, description, source, fix: Fix::None, suspect: None, notes: &[], extra: None, claims }
    }

    fn fix(mut self, fix: Fix, notes: &'static [&'static str]) -> Self {
        self.fix = fix;
        self.notes = notes;
        self
    }

    fn note(mut self, note: &'static str) -> Self {
        self.extra = Some(note);
        self
    }

    fn suspect(mut self, reason: &'static str) -> Self {
        self.suspect = Some(reason);
        self
    }
}

const PYRAMID: &str = "pyramid";

const SEVEN_ROWS: &[(&str, &str)] = &[("CDdcbab", "CDdcbaB")];
const EIGHT_ROWS: &[(&str, &str)] = &[("CDAdbEdD", "CDAdBEdD")];
const EIGHT_ROWS_LONG: &[(&str, &str)] = &[("CDAdbEdD", "CDAdBEdD"), ("aaaaaaaaa", "aaaaaaaa")];
const SEVEN_NOTE: &[&str] = &["shared row CDdcbab read as CDdcbaB: with b it is not orthogonal to baBCDdc"];
const EIGHT_NOTE: &[&str] = &["shared row CDAdbEdD read as CDAdBEdD: with b it is not orthogonal to ABdCCccd"];
const EIGHT_LONG_NOTE: &[&str] = &[
    "shared row CDAdbEdD read as CDAdBEdD: with b it is not orthogonal to ABdCCccd",
    "row aaaaaaaaa has nine letters; read as aaaaaaaa",
];

const EIGHT_BY_SEVEN: [&str; 6] = ["uom-8x7-1", "uom-8x7-2", "uom-8x7-3", "uom-8x7-4", "uom-8x7-5", "uom-8x7-6"];

fn others(names: &[&'static str], me: &str) -> Vec<&'static str> {
    names.iter().copied().filter(|&n| n != me).collect()
}

fn eight_by_seven(k: usize, source: &'static str) -> Raw {
    let name = EIGHT_BY_SEVEN[k - 1];
    let claims = Claims { inequivalent_to: others(&EIGHT_BY_SEVEN, name), ..Claims::uom(8, 7) };
    Raw::new(name, "one of the six UOM classes in O(8, 7)", source, claims)
}

fn raw_entries() -> Vec<Raw> {
    vec![
        Raw::new("basis-1", "the single class of O(1)", "a, a'", Claims { balanced: Some(true), ..Claims::uom(2, 1) }),
        Raw::new("basis-2a", "first class of O(2)", "a b, a' b'", Claims {
            balanced: Some(true),
            reducible: Some(true),
            inequivalent_to: vec!["basis-2b"],
            ..Claims::uom(4, 2)
        })
        .fix(Fix::Text("a b, a b', a' b, a' b'"), &["two rows lost in transcription; restored as the full 2x2 product basis"]),
        Raw::new("basis-2b", "second class of O(2)", "a b, a' c, a' c'", Claims {
            balanced: Some(true),
            reducible: Some(true),
            ..Claims::uom(4, 2)
        })
        .fix(Fix::Text("a b, a b', a' c, a' c'"), &["row a b' lost in transcription"]),
        Raw::new("uom-4x3", "UOM in O(4, 3)", "a c e, a' d' f, b c' f', b' d e'", Claims { balanced: Some(true), ..Claims::uom(4, 3) }),
        Raw::new("uom-6x4", "the UOM in O(6, 4), unbalanced", "x y z w, x' b d e, a y' d' f, a' c z' e', a b' d w', x' c' d' f'", Claims {
            balanced: Some(false),
            ..Claims::uom(6, 4)
        }),
        Raw::new(
            "uom-11x8",
            "UOM in O(11, 8), unbalanced",
            "a e i m q v alpha zeta, b f j m' r w beta eta, c g k n s v' beta' theta, \
             a' f' l n' t x gamma iota, c' h j' o t' y alpha' kappa, b' h i' p s' y' delta iota', \
             b' h' l' n' u z epsilon zeta', c' h' i' p r' z' delta iota', a' f' l' p' t x epsilon' theta', \
             d g' l p' q' w' gamma' kappa', d' e' k' o' u' x' delta' eta'",
            Claims { balanced: Some(false), ..Claims::uom(11, 8) },
        ),
        Raw::new(
            "composed-16x5",
            "the 4x3 UOM composed with three copies of a 4x2 product basis and one 4x2 block",
            "a c e g h, a c e g h', a c e g' h, a c e g' h', a' d' f g h, a' d' f g h', a' d' f g' h, \
             a' d' f g' h', a' d' f g' h', b c' f' g h, b c' f' g h', b c' f' g' h, b c' f' g' h', \
             b c' f' g' h', b' d e' x y, b' d e' x y', b' d e' x' z, b' d e' x' z'",
            Claims { decomposable: Some(true), ..Claims::uom(16, 5) },
        )
        .fix(Fix::Dedup, &["rows a' d' f g' h' and b c' f' g' h' are printed twice"]),
        Raw::new(
            "decomposable-8x4",
            "decomposable UOM in O(8, 4)",
            "x a c e, x a' d f, x b c' f', x b' d' e', x' g i k, x' g' j l, x' h i' l', x' h' j' k'",
            Claims { decomposable: Some(true), reducible: Some(true), ..Claims::uom(8, 4) },
        ),
        Raw::new(
            "indecomposable-8x4",
            "indecomposable UOM in O(8, 4)",
            "a c e g, a d e' h, a d' f g', a' c' f h, a' c e g, b d' f' g', b d e' h', b' c' f' h'",
            Claims { decomposable: Some(false), ..Claims::uom(8, 4) },
        ),
        Raw::new("uom-6x4-minus-first", "the 6x4 UOM without its first row", "x' b d e, a y' d' f, a' c z' e', a b' d w', x' c' d' f'", Claims {
            completions: Some(Completions {
                drop: &[],
                rows: "a' b' z f, a' b' d e, a' c' d' f, a' c' d e', a' c d' e, a' c z e', x y z w, x y d' e, \
                       x c' d w, x c' d' f', x b d e, x b z f', a y d' f, a c d' f', a b' d w, a b d e'",
                max_mutually_orthogonal: Some(11),
            }),
            ..Claims::orthogonal(5, 4, false)
        }),
        Raw::new("lift-source-3x3", "orthogonal 3x3 matrix lifted to a full basis", "a b c, a' d e, a b' e'", Claims::orthogonal(3, 3, false)),
        Raw::new(
            "lift-result-8x3",
            "full basis in O(8, 3) containing the lifted source",
            "a b c, a b c', a' d e, a' d e', a b' e', a b' e, a d' x, a d' x'",
            Claims::uom(8, 3),
        )
        .fix(Fix::Rows(&[("a d' x", "a' d' x"), ("a d' x'", "a' d' x'")]), &[
            "last two rows start with a, which makes them parallel to the first rows; read as a'",
        ]),
        Raw::new(
            "rotated-pair-8x4",
            "fresh 4x4 block over its perpendicular copy with column j rotated j-1 steps down",
            "y11 y12 y13 y14, y21 y22 y23 y24, y31 y32 y33 y34, y41 y42 y43 y44, \
             y11' y42' y33' y24', y21' y12' y43' y34', y31' y22' y13' y44', y41' y32' y23' y14'",
            Claims { size: Some((8, 4)), orthogonal: Some(false), ..Claims::default() },
        ),
        Raw::new(
            "klein-pair-8x4",
            "fresh 4x4 block over its perpendicular copy permuted by the Klein four-group",
            "y11 y12 y13 y14, y21 y22 y23 y24, y31 y32 y33 y34, y41 y42 y43 y44, \
             y11' y22' y33' y44', y21' y12' y43' y34', y31' y42' y13' y24', y41' y32' y23' y14'",
            Claims { size: Some((8, 4)), orthogonal: Some(false), ..Claims::default() },
        ),
        Raw::new(
            "genshift-6x5",
            "GenShift UOM for five qubits",
            "y01 y12' y23' y24 y15, y11 y02 y13' y24' y25, y21 y12 y03 y14' y25', \
             y21' y22 y13 y04 y15', y11' y22' y23 y14 y05, y01' y02' y03' y04' y05'",
            Claims::uom(6, 5),
        ),
        Raw::new("doubling-seed-4x3", "4x3 UOM used as both halves of the doubling", "a b c, a' e' f, d b' f', d' e c'", Claims {
            equivalent_to: vec!["uom-4x3"],
            ..Claims::uom(4, 3)
        }),
        eight_by_seven(1, "aaaaaaa, Abbbbbb, bABcccc, BBAddddd, cccABCD, CddBADC, dCDCDAB, DDCDCBA")
            .fix(Fix::Rows(&[("BBAddddd", "BBAdddd")]), &["row BBAddddd has eight letters; read as BBAdddd"]),
        eight_by_seven(2, "aaaaaaa, Abbbbbb, bABcccc, BcABddd, cdcABCD, CCddABC, dDDCDAB, DBCDCDA"),
        eight_by_seven(3, "aaaaaaa, Abbbbbb, bAccBcc, BcABcdd, cdCAdbD, CCddACB, dDBDCAC, DBDCDDA")
            .fix(Fix::Rows(&[("cdCAdbD", "cdCAdBD")]), &["row cdCAdbD is not orthogonal to Abbbbbb; read as cdCAdBD"]),
        eight_by_seven(4, "aaaaaaa, Abbbbbb, bAcccBc, BcABdcd, cddABCC, CCCdAdB, dDBDCAD, DBDCDDA"),
        eight_by_seven(5, "aaaaaaa, Abbbbbb, bAcccBc, BcAddcB, cddABCC, CCCBAdd, dDBCDAAD, DBDDCDA")
            .fix(Fix::Rows(&[("dDBCDAAD", "dDBCDAD")]), &["row dDBCDAAD has eight letters; read as dDBCDAD"]),
        eight_by_seven(6, "aaaaaaa, Abbbbbb, bAccccB, BcAddBc, cddABCC, CCCBAdd, dDBCDAAD, DBDDCDA")
            .fix(Fix::Rows(&[("dDBCDAAD", "dDBCDAD")]), &["row dDBCDAAD has eight letters; read as dDBCDAD"]),
        Raw::new("uom-7x4", "UOM in O(7, 4)", "a c e g, a c' f h, a d f' g', a' c e i, a' d f i', b c' f' g, b' d' e' h'", Claims {
            completions: Some(Completions { drop: &[1], rows: "a c e g, a c f h, a d f h'", max_mutually_orthogonal: Some(2) }),
            ..Claims::uom(7, 4)
        }),
        Raw::new("uom-10x5", "UOM in O(10, 5)", "baBCc, cbaBC, CcbaB, BCcba, AAAAA, CaCcb, aACbb, cBbBa, CABBa, caCbC", Claims {
            completions: Some(Completions {
                drop: &[9, 10],
                rows: "CABBa, caCbC, aABBc, caAcA, cabbA, CAaBb",
                max_mutually_orthogonal: None,
            }),
            ..Claims::uom(10, 5)
        })
        .note("listed orthogonal row aABbc is not orthogonal to aACbb; read as aABBc"),
        Raw::new(
            "reducible-8x4",
            "maximal reducible UOM in O(8, 4): a one-column basis composed with two 4x3 UOMs",
            "a b c d, a b' e f', a g' c' f, a g e' d', a' u v w, a' u' x y', a' z' v' y, a' z x' w'",
            Claims { reducible: Some(true), maximal: Some(true), decomposable: Some(true), ..Claims::uom(8, 4) },
        ),
        Raw::new(
            "irreducible-8x4",
            "maximal irreducible UOM in O(8, 4): a 4x3 UOM composed with four one-column bases",
            "a b c u, a b c u', a' d e' v, a' d e' v', f' b' e w, f' b' e w', f d' c' x, f d' c' x'",
            Claims { reducible: Some(false), maximal: Some(true), decomposable: Some(true), ..Claims::uom(8, 4) },
        ),
        Raw::new("uom-11x5", "UOM of size 11x5", "cbaBC, CcbaB, BCcba, AAAAA, aBCBb, baBbc, CCcBa, aCCbC, cacBc, ccbba, BcBba", Claims::uom(11, 5)),
        Raw::new("uom-10x6", "UOM of size 10x6", "aaaaaa, Abbcbb, bBcACd, bcCBAB, BABddC, cBCbDA, CCADBD, BccCAc, bAcCcd, bBcdAD", Claims::uom(10, 6)),
        Raw::new("uom-11x6", "UOM of size 11x6", "aAbbbb, Abcccc, ABdddd, cCBADC, CdCBAD, CDDCBA, adaaaB, caDaCb, CDBDCa, ccADCB, aDdBcc", Claims::uom(11, 6)),
        Raw::new(
            "uom-13x6-a",
            "UOM of size 13x6, first of two",
            "aAbbbb, Abcccc, ABdddd, bcADCB, bCBADC, BdCBAD, BDDCBA, acaBaa, aCBaaa, aCbcaB, acBbca, bCbCBD, aabbbb",
            Claims { inequivalent_to: vec!["uom-13x6-b"], ..Claims::uom(13, 6) },
        ),
        Raw::new(
            "uom-13x6-b",
            "UOM of size 13x6, second of two",
            "aAbbbb, Abcccc, ABdddd, bcADCB, bCBADC, BdCBAD, BDDCBA, aDaaBa, BaDCbd, BdBCaD, adbdBd, BDCBbD, BdCDBd",
            Claims::uom(13, 6),
        ),
        Raw::new(
            "uom-13x7-a",
            "UOM of size 13x7, first of two",
            "baBCDdc, cbaBCDd, dcbaBCD, DdcbaBC, CDdcbab, BCDdcba, AAAAAAA, aBCCCcC, aBDDdce, BadBccb, aAdCcbd, aDDDccC, cadbdcc",
            Claims { inequivalent_to: vec!["uom-13x7-b"], ..Claims::uom(13, 7) },
        )
        .fix(Fix::Rows(&[("CDdcbab", "CDdcbaB"), ("aBDDdce", "aBDDdcc")]), &[
            "shared row CDdcbab read as CDdcbaB: with b it is not orthogonal to baBCDdc",
            "row aBDDdce uses e, the only fifth variable of its column; read as aBDDdcc",
        ]),
        Raw::new(
            "uom-13x7-b",
            "UOM of size 13x7, second of two",
            "baBCDdc, cbaBCDd, dcbaBCD, DdcbaBC, CDdcbab, BCDdcba, AAAAAAA, DBCDaDb, dBaDdcb, adADAcC, DcaBddb, dAADaAd, DdabABC",
            Claims::uom(13, 7),
        )
        .fix(Fix::Rows(SEVEN_ROWS), SEVEN_NOTE),
        Raw::new(
            "uom-14x7",
            "UOM of size 14x7",
            "baBCDdc, cbaBCDd, dcbaBCD, DdcbaBC, CDdcbab, BCDdcba, AAAAAAA, aBCCCcC, aBDDdce, BadBccb, aAdCcbd, aDDDccC, cadbdcc",
            Claims::uom(14, 7),
        )
        .fix(Fix::Rows(&[("CDdcbab", "CDdcbaB"), ("aBDDdce", "aBDDdcc")]), &[
            "shared row CDdcbab read as CDdcbaB: with b it is not orthogonal to baBCDdc",
            "row aBDDdce read as aBDDdcc, as in the first 13x7 matrix",
        ])
        .suspect("transcribed rows repeat the first 13x7 matrix and give 13 rows, not 14"),
        Raw::new(
            "uom-15x7",
            "UOM of size 15x7",
            "baBCDdc, cbaBCDd, dcbaBCD, DdcbaBC, CDdcbab, BCDdcba, AAAAAAA, DDaDddb, aBCDbDb, adCDDdd, aBBDBDc, dcbABaD, dcbaBcD, dCbaBBD, DDADBaC",
            Claims::uom(15, 7),
        )
        .fix(Fix::Rows(&[("CDdcbab", "CDdcbaB"), ("adCDDdd", "adCDddd")]), &[
            "shared row CDdcbab read as CDdcbaB: with b it is not orthogonal to baBCDdc",
            "row adCDDdd is not orthogonal to DDADBaC; read as adCDddd",
        ]),
        Raw::new(
            "uom-19x7",
            "UOM of size 19x7",
            "baBCDdc, cbaBCDd, dcbaBCD, DdcbaBC, CDdcbab, BCDdcba, AAAAAAA, DDaDddb, aBCDbDb, acAcBcc, adCACdC, aCCDBDD, \
             ddbabdA, CcaABDc, BdaACdc, ddBaCdC, dCbaBdA, bdaAddc, DcAaBbC",
            Claims::uom(19, 7),
        )
        .fix(Fix::Rows(SEVEN_ROWS), SEVEN_NOTE),
        Raw::new(
            "uom-13x8",
            "UOM of size 13x8",
            "aaaaaaaa, bbbAbbbb, cccbcABc, CdBcDdAe, BdAdCDdD, BDDBeeeA, CDAdbEdD, ABDDdcEC, dCdDABCE, DACCECDB, ABdCCccd, BDdcCecA, BdAdcDdC",
            Claims::uom(13, 8),
        )
        .fix(Fix::Rows(EIGHT_ROWS), EIGHT_NOTE),
        Raw::new(
            "uom-14x8",
            "UOM of size 14x8",
            "aaaaaaaa, bbbAbbbb, cccbcABc, CdBcDdAe, BdAdCDdD, BDDBeeeA, CDAdbEdD, ABDDdcEC, dCdDABCE, DACCECDB, ABdCCccd, DDdcCeAB, BdAdcDdC, DBdcCAad",
            Claims::uom(14, 8),
        )
        .fix(Fix::Rows(EIGHT_ROWS), EIGHT_NOTE),
        Raw::new(
            "uom-15x8",
            "UOM of size 15x8",
            "aaaaaaaa, bbbAbbbb, cccbcABc, CdBcDdAe, BdAdCDdD, BDDBeeeA, CDAdbEdD, ABDDdcEC, dCdDABCE, DACCECDB, ABdCCccd, DDdcCeAB, BdAdcDdC, DAdcCBad, BAdcCbad",
            Claims::uom(15, 8),
        )
        .fix(Fix::Rows(EIGHT_ROWS), EIGHT_NOTE),
        Raw::new(
            "uom-17x8",
            "UOM of size 17x8",
            "bbbAebbd, dbbBEbDA, DDdAbcbD, DAaBECab, DabAECbd, AdbdedbD, bdCdeDAD, aaaaaaaaa, cccbcABc, ABdBdccd, CdBcDdAe, \
             BdAdCDdD, BDDBeeeA, CDAdbEdD, ABDDdcEC, dCdDABCE, DACCECDB",
            Claims::uom(17, 8),
        )
        .fix(Fix::Rows(EIGHT_ROWS_LONG), EIGHT_LONG_NOTE)
        .suspect("orthogonal after the repairs but extendible, for instance by DbABEcad; no single-letter change makes it a UOM"),
        Raw::new(
            "uom-18x8",
            "UOM of size 18x8",
            "DbACEcbd, ebbAebbd, dbbBEbDA, DDdAbcbD, DAaBECab, DabAECbd, AdbdedbD, bdCdeDAD, aaaaaaaaa, cccbcABc, ABdBdccd, \
             CdBcDdAe, BdAdCDdD, EDDBeeeA, CDAdbEdD, ABDDdcEC, dCdDABCE, DACCECDB",
            Claims::uom(18, 8),
        )
        .fix(Fix::Rows(EIGHT_ROWS_LONG), EIGHT_LONG_NOTE),
        Raw::new(
            "uom-19x8",
            "UOM of size 19x8",
            "DbCCEcAd, DbCAEcad, ebbAebbd, dbbBEbDA, DDdAbcbD, DAaBECab, DabAECbd, AdbdedbD, bdCdeDAD, aaaaaaaaa, cccbcABc, \
             ABdBdccd, CdBcDdAe, BdAdCDdD, EDDBeeeA, CDAdbEdD, ABDDdcEC, dCdDABCE, DACCECDB",
            Claims::uom(19, 8),
        )
        .fix(Fix::Rows(EIGHT_ROWS_LONG), EIGHT_LONG_NOTE),
        Raw::new(PYRAMID, "five-state two-qutrit Pyramid UPB", "v_i ⊗ v_{2i mod 5}, i = 0..4", Claims {
            dims: Some(vec![3, 3]),
            states: Some(5),
            orthogonal: Some(true),
            uom: Some(true),
            ..Claims::default()
        }),
    ]
}

fn split(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|r| !r.is_empty()).collect()
}

fn apply_fix(source: &str, fix: Fix) -> String {
    match fix {
        Fix::None => source.to_owned(),
        Fix::Text(t) => t.to_owned(),
        Fix::Rows(pairs) => split(source)
            .into_iter()
            .map(|r| pairs.iter().find(|(old, _)| *old == r).map_or(r, |(_, new)| new))
            .collect::<Vec<_>>()
            .join(", "),
        Fix::Dedup => {
            let mut seen = BTreeSet::new();
            split(source).into_iter().filter(|r| seen.insert(*r)).collect::<Vec<_>>().join(", ")
        }
    }
}

fn build(raw: Raw) -> Result<CatalogEntry, CatalogError> {
    let text = apply_fix(raw.source, raw.fix);
    let item = if raw.name == PYRAMID {
        CatalogItem::Qudit { set: pyramid_upb() }
    } else {
        let matrix = parse_matrix(&text).map_err(|source| CatalogError::Parse { name: raw.name.to_owned(), source })?;
        CatalogItem::Matrix { matrix }
    };
    let status = match (raw.suspect, raw.fix) {
        (Some(_), _) => SourceStatus::Suspect,
        (None, Fix::None) => SourceStatus::Verbatim,
        (None, _) => SourceStatus::Repaired,
    };
    let mut notes: Vec<String> = raw.notes.iter().map(|s| (*s).to_owned()).collect();
    notes.extend(raw.extra.into_iter().chain(raw.suspect).map(str::to_owned));
    Ok(CatalogEntry {
        name: raw.name,
        description: raw.description,
        source: raw.source,
        text,
        status,
        notes,
        claims: raw.claims,
        item,
    })
}

/// Names of all entries, in catalog order.
pub fn catalog_names() -> Vec<&'static str> {
    raw_entries().iter().map(|r| r.name).collect()
}

pub fn catalog_list() -> Vec<CatalogEntry> {
    raw_entries().into_iter().map(|r| build(r).expect("built-in entries parse")).collect()
}

pub fn catalog_get(name: &str) -> Result<CatalogEntry, CatalogError> {
    let raw = raw_entries().into_iter().find(|r| r.name == name).ok_or_else(|| CatalogError::UnknownEntry(name.to_owned()))?;
    build(raw)
}

/// Matrix of a catalog entry, for callers that only deal with matrices.
pub fn catalog_matrix(name: &str) -> Result<FormalMatrix, CatalogError> {
    catalog_get(name)?.matrix().cloned().ok_or_else(|| CatalogError::UnknownEntry(name.to_owned()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub expected: String,
    pub found: String,
    pub passed: bool,
}

impl ClaimCheck {
    fn new(claim: impl Into<String>, expected: impl ToString, found: impl ToString) -> Self {
        let (expected, found) = (expected.to_string(), found.to_string());
        ClaimCheck { claim: claim.into(), passed: expected == found, expected, found }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryCheck {
    pub name: String,
    pub status: SourceStatus,
    pub checks: Vec<ClaimCheck>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelfTestReport {
    pub entries: Vec<EntryCheck>,
    /// Every entry that is not suspect passed all its claims.
    pub passed: bool,
    pub suspect_failures: Vec<String>,
}

fn row_set(rows: impl IntoIterator<Item = Vec<Var>>) -> BTreeSet<Vec<Var>> {
    rows.into_iter().collect()
}

fn check_completions(entry: &CatalogEntry, x: &FormalMatrix, c: &Completions) -> Vec<ClaimCheck> {
    let joined = parse_matrix(&format!("{}, {}", entry.text, c.rows));
    let Ok(joined) = joined else {
        return vec![ClaimCheck::new("completions parse", "ok", "parse error")];
    };
    let expected = row_set(joined.to_rows().into_iter().skip(x.nrows()));
    let drop: Vec<usize> = c.drop.iter().map(|i| i - 1).collect();
    let found = match x.without_rows(&drop).map(|y| enumerate_orthogonal_rows(&y)) {
        Ok(Ok(set)) => set,
        _ => return vec![ClaimCheck::new("completions", "enumerated", "error")],
    };
    let mut out = vec![
        ClaimCheck::new(format!("rows orthogonal after dropping {:?}", c.drop), expected.len(), found.len()),
        ClaimCheck::new("completions match listed rows", true, found.is_finite() && row_set(found.rows.clone()) == expected),
    ];
    if let Some(k) = c.max_mutually_orthogonal {
        out.push(ClaimCheck::new("max mutually orthogonal completions", k, max_mutually_orthogonal(&found.rows)));
    }
    out
}

fn check_matrix(entry: &CatalogEntry, x: &FormalMatrix, catalog: &[CatalogEntry]) -> Vec<ClaimCheck> {
    let cl = &entry.claims;
    let mut out = Vec::new();
    if let Some((m, n)) = cl.size {
        out.push(ClaimCheck::new("size", format!("{m}x{n}"), format!("{}x{}", x.nrows(), x.ncols())));
    }
    let orthogonal = is_orthogonal_matrix(x);
    if let Some(o) = cl.orthogonal {
        out.push(ClaimCheck::new("orthogonal", o, orthogonal));
    }
    if let Some(u) = cl.uom {
        out.push(ClaimCheck::new("uom", u, orthogonal && is_uom(x)));
    }
    if let Some(b) = cl.balanced {
        out.push(ClaimCheck::new("balanced", b, stats(x).balanced));
    }
    if let Some(r) = cl.reducible {
        out.push(ClaimCheck::new("reducible", r, (0..x.ncols()).any(|j| x.column_ids(j).len() == 1)));
    }
    if let Some(d) = cl.decomposable {
        let found = decomposition_probe(x, x.ncols().saturating_sub(1)).map(|p| p.decomposition.is_some());
        out.push(ClaimCheck::new("decomposable", d, found.map_or("error".into(), |f| f.to_string())));
    }
    if let Some(mx) = cl.maximal {
        let found = maximality_status(x).map(|s| s.maximal);
        out.push(ClaimCheck::new("maximal", mx, found.map_or("error".into(), |f| f.to_string())));
    }
    for (names, want) in [(&cl.equivalent_to, true), (&cl.inequivalent_to, false)] {
        for other in names.iter() {
            let y = catalog.iter().find(|e| e.name == *other).and_then(CatalogEntry::matrix);
            let found = y.map_or("missing".to_owned(), |y| are_equivalent(x, y).is_some().to_string());
            out.push(ClaimCheck::new(format!("equivalent to {other}"), want, found));
        }
    }
    if let Some(c) = &cl.completions {
        out.extend(check_completions(entry, x, c));
    }
    out
}

fn check_qudit(entry: &CatalogEntry, set: &QuditProductSet) -> Vec<ClaimCheck> {
    let cl = &entry.claims;
    let mut out = Vec::new();
    if let Some(d) = &cl.dims {
        out.push(ClaimCheck::new("dims", format!("{d:?}"), format!("{:?}", set.dims)));
    }
    if let Some(k) = cl.states {
        out.push(ClaimCheck::new("states", k, set.states.len()));
    }
    if let Some(o) = cl.orthogonal {
        let k = set.states.len();
        let found = (0..k).all(|i| (i + 1..k).all(|j| set.states[i].inner(&set.states[j]).norm() < 1e-12));
        out.push(ClaimCheck::new("orthogonal", o, found));
    }
    if let Some(u) = cl.uom {
        let found = qudit_orthogonal_product_vectors(set).map(|r| r.states.is_empty());
        out.push(ClaimCheck::new("unextendible", u, found.map_or("error".into(), |f| f.to_string())));
    }
    out
}

/// Check the claims of a single entry against the given catalog.
pub fn check_entry(entry: &CatalogEntry, catalog: &[CatalogEntry]) -> EntryCheck {
    let checks = match &entry.item {
        CatalogItem::Matrix { matrix } => check_matrix(entry, matrix, catalog),
        CatalogItem::Qudit { set } => check_qudit(entry, set),
    };
    EntryCheck { name: entry.name.to_owned(), status: entry.status, passed: checks.iter().all(|c| c.passed), checks }
}

/// Check every claim of every entry. Suspect entries are checked too but
/// only reported.
pub fn self_test() -> SelfTestReport {
    let catalog = catalog_list();
    let entries: Vec<EntryCheck> = catalog.iter().map(|e| check_entry(e, &catalog)).collect();
    let passed = entries.iter().all(|e| e.passed || e.status == SourceStatus::Suspect);
    let suspect_failures =
        entries.iter().filter(|e| e.status == SourceStatus::Suspect && !e.passed).map(|e| e.name.clone()).collect();
    SelfTestReport { entries, passed, suspect_failures }
}
