use std::collections::BTreeSet;

use modgen_core::lang::{compile, CheckedProgram, MethodId};
use modgen_core::testmodel::{
    build_cluster, enforce_target_suffix, random_statement_insertion, type_repair, Arg,
    ClusterError, ClusterMode, Element, Literal, Saturated, TestCase, TestCluster, TestStatement,
    VarRef,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CORPUS: &[(&str, &str)] = &[
    ("consistency.moo", "Consistency"),
    ("album.moo", "Album"),
    ("artists.moo", "Artists"),
    ("static_util.moo", "StaticUtil"),
    ("account.moo", "Account"),
    ("int_stack.moo", "IntStack"),
    ("thermostat.moo", "Thermostat"),
    ("slug.moo", "Slug"),
    ("inventory.moo", "Inventory"),
    ("session.moo", "Session"),
];

fn corpus(name: &str) -> CheckedProgram {
    let path = format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    compile(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn method(p: &CheckedProgram, class: &str, name: &str) -> MethodId {
    p.find_method(class, name).unwrap()
}

fn ctor(p: &CheckedProgram, class: &str) -> MethodId {
    p.constructors(p.class_id(class).unwrap()).next().unwrap()
}

/// Every public method of every corpus class.
fn all_targets() -> Vec<(CheckedProgram, String, String)> {
    let mut out = Vec::new();
    for (file, class) in CORPUS {
        let p = corpus(file);
        let cid = p.class_id(class).unwrap();
        let names: Vec<String> = modgen_core::bench::target_methods(&p, cid)
            .map(|m| p.method(m).name.clone())
            .collect();
        for n in names {
            out.push((p.clone(), class.to_string(), n));
        }
    }
    out
}

/// The only statements a STRICT test may contain.
fn strict_whitelisted(p: &CheckedProgram, cluster: &TestCluster, test: &TestCase) -> bool {
    test.statements.iter().all(|s| match s {
        TestStatement::Construct { ctor, .. } => ctor.class == cluster.target.class,
        TestStatement::Invoke { method, .. } | TestStatement::StaticInvoke { method, .. } => {
            *method == cluster.target && !p.method(*method).is_ctor
        }
        _ => false,
    })
}

#[test]
fn strict_cluster_has_only_target_and_its_constructors() {
    let p = corpus("consistency.moo");
    let c = build_cluster(&p, "Consistency", "checkConsistency", ClusterMode::Strict).unwrap();
    assert_eq!(
        c.test_methods,
        BTreeSet::from([method(&p, "Consistency", "checkConsistency")])
    );
    assert_eq!(c.generators, BTreeSet::from([ctor(&p, "Consistency")]));
    assert!(c.modifiers.is_empty());
    assert!(c.settable_fields.is_empty());
}

#[test]
fn emote_cluster_adds_setters() {
    let p = corpus("consistency.moo");
    let c = build_cluster(&p, "Consistency", "checkConsistency", ClusterMode::Emote).unwrap();
    for m in ["setType", "setName", "checkConsistency"] {
        assert!(c.test_methods.contains(&method(&p, "Consistency", m)), "{m}");
    }
    for m in ["setType", "setName"] {
        assert!(c.modifiers.contains(&method(&p, "Consistency", m)), "{m}");
    }
    assert!(!c.modifiers.contains(&method(&p, "Consistency", "checkConsistency")));
}

#[test]
fn emote_cluster_exposes_public_fields() {
    let p = corpus("artists.moo");
    let c = build_cluster(&p, "Artists", "getArtist", ClusterMode::Emote).unwrap();
    let names: Vec<&str> = c
        .settable_fields
        .iter()
        .map(|f| p.field(*f).name.as_str())
        .collect();
    assert_eq!(names, ["artists", "count"]);
    let strict = build_cluster(&p, "Artists", "getArtist", ClusterMode::Strict).unwrap();
    assert!(strict.settable_fields.is_empty());
    // Both constructors are generators in either mode.
    assert_eq!(strict.generators.len(), 2);
}

#[test]
fn emote_cluster_reaches_parameter_classes() {
    let p = corpus("session.moo");
    let c = build_cluster(&p, "Session", "canDelete", ClusterMode::Emote).unwrap();
    assert!(c.generators.contains(&ctor(&p, "User")));
    assert!(c.modifiers.contains(&method(&p, "Session", "login")));
    assert!(c.modifiers.contains(&method(&p, "Session", "logout")));
}

#[test]
fn impurity_is_seen_through_one_self_call() {
    let src = "class A {
        private int n;
        A() { }
        private void bump() { this.n = this.n + 1; }
        public void indirect() { this.bump(); }
        public int read() { return this.n; }
        public int target() { return this.n; }
    }";
    let p = compile(src).unwrap();
    let c = build_cluster(&p, "A", "target", ClusterMode::Emote).unwrap();
    assert!(c.modifiers.contains(&method(&p, "A", "indirect")));
    assert!(!c.modifiers.contains(&method(&p, "A", "read")));
    // Private methods are never selectable.
    assert!(!c.contains(Element::Call(method(&p, "A", "bump"))));
}

#[test]
fn unknown_and_private_targets_are_rejected() {
    let p = corpus("album.moo");
    assert!(matches!(
        build_cluster(&p, "Album", "nope", ClusterMode::Strict),
        Err(ClusterError::UnknownMethod { .. })
    ));
    assert!(matches!(
        build_cluster(&p, "Nope", "x", ClusterMode::Strict),
        Err(ClusterError::UnknownClass(_))
    ));
    let q = compile("class A { private int f() { return 1; } }").unwrap();
    assert!(matches!(
        build_cluster(&q, "A", "f", ClusterMode::Emote),
        Err(ClusterError::NotCallable(_))
    ));
}

#[test]
fn strict_clusters_are_subsets_of_emote_clusters() {
    for (p, class, name) in all_targets() {
        let s = build_cluster(&p, &class, &name, ClusterMode::Strict).unwrap();
        let e = build_cluster(&p, &class, &name, ClusterMode::Emote).unwrap();
        assert!(s.test_methods.is_subset(&e.test_methods), "{class}.{name}");
        assert!(s.generators.is_subset(&e.generators), "{class}.{name}");
        assert!(s.modifiers.is_subset(&e.modifiers), "{class}.{name}");
        assert!(s.settable_fields.is_subset(&e.settable_fields), "{class}.{name}");
    }
}

#[test]
fn literal_pool_harvests_source_strings() {
    let p = corpus("album.moo");
    let c = build_cluster(&p, "Album", "getPrice", ClusterMode::Strict).unwrap();
    assert!(c.literals.strings.iter().any(|s| s == "0123456789"));
    assert!(c.literals.strings.iter().any(|s| s.is_empty()));
    assert!(c.literals.strings.iter().any(|s| s == "a"));
    assert_eq!(c.literals.ints, [-1, 0, 1, 2, 7, 100]);
}

#[test]
fn insertion_into_empty_strict_test() {
    let p = corpus("consistency.moo");
    let c = build_cluster(&p, "Consistency", "checkConsistency", ClusterMode::Strict).unwrap();
    let target = c.target;
    for seed in 0..10 {
        let t = random_statement_insertion(&p, &c, &TestCase::default(), &mut rng(seed)).unwrap();
        t.validate(&p).unwrap();
        match t.statements.as_slice() {
            [TestStatement::Construct { .. }] => {}
            [TestStatement::Construct { .. }, TestStatement::Invoke { method, receiver, .. }] => {
                assert_eq!(*method, target);
                assert_eq!(*receiver, VarRef(0));
            }
            other => panic!("seed {seed}: unexpected {other:?}"),
        }
    }
}

#[test]
fn insertion_can_call_a_modifier_on_an_existing_object() {
    let p = corpus("consistency.moo");
    let c = build_cluster(&p, "Consistency", "checkConsistency", ClusterMode::Emote).unwrap();
    let set_type = method(&p, "Consistency", "setType");
    let base = TestCase::new(vec![TestStatement::Construct {
        ctor: ctor(&p, "Consistency"),
        args: vec![],
    }]);
    let found = (0..200).any(|seed| {
        let t = random_statement_insertion(&p, &c, &base, &mut rng(seed)).unwrap();
        t.validate(&p).unwrap();
        t.statements.iter().any(|s| {
            matches!(s, TestStatement::Invoke { receiver: VarRef(0), method, args }
                if *method == set_type && matches!(args[0], Arg::Lit(Literal::Str(_))))
        })
    });
    assert!(found);
}

#[test]
fn insertion_without_generators_is_saturated() {
    let p = corpus("consistency.moo");
    let mut c = build_cluster(&p, "Consistency", "checkConsistency", ClusterMode::Strict).unwrap();
    c.generators.clear();
    c.elements = vec![Element::Call(c.target)];
    let err = random_statement_insertion(&p, &c, &TestCase::default(), &mut rng(0)).unwrap_err();
    assert!(err.0.contains("no generator for Consistency"), "{err}");
}

#[test]
fn suffix_is_appended_when_missing() {
    let p = corpus("consistency.moo");
    let c = build_cluster(&p, "Consistency", "checkConsistency", ClusterMode::Emote).unwrap();
    let base = TestCase::new(vec![
        TestStatement::Construct {
            ctor: ctor(&p, "Consistency"),
            args: vec![],
        },
        TestStatement::Invoke {
            receiver: VarRef(0),
            method: method(&p, "Consistency", "setType"),
            args: vec![Arg::Lit(Literal::Str("a".into()))],
        },
    ]);
    let t = enforce_target_suffix(&p, &c, &base, &mut rng(1)).unwrap();
    t.validate(&p).unwrap();
    assert_eq!(t.statements[..2], base.statements[..]);
    assert_eq!(t.len(), 3);
    assert_eq!(t.statements[2].callee(), Some(c.target));
}

#[test]
fn statements_after_the_last_target_call_are_dropped() {
    let p = corpus("account.moo");
    let c = build_cluster(&p, "Account", "withdraw", ClusterMode::Emote).unwrap();
    let new = TestStatement::Construct {
        ctor: ctor(&p, "Account"),
        args: vec![],
    };
    let withdraw = TestStatement::Invoke {
        receiver: VarRef(0),
        method: c.target,
        args: vec![Arg::Lit(Literal::Int(1))],
    };
    let freeze = TestStatement::Invoke {
        receiver: VarRef(0),
        method: method(&p, "Account", "freeze"),
        args: vec![],
    };
    let trailing = TestCase::new(vec![new.clone(), withdraw.clone(), freeze.clone()]);
    let t = enforce_target_suffix(&p, &c, &trailing, &mut rng(0)).unwrap();
    assert_eq!(t.statements, [new.clone(), withdraw.clone()]);
    let leading = TestCase::new(vec![new.clone(), freeze.clone(), withdraw.clone()]);
    assert_eq!(enforce_target_suffix(&p, &c, &leading, &mut rng(0)).unwrap(), leading);
    let done = TestCase::new(vec![new, withdraw]);
    assert_eq!(enforce_target_suffix(&p, &c, &done, &mut rng(0)).unwrap(), done);
}

#[test]
fn repair_rebinds_a_dangling_int() {
    let p = corpus("account.moo");
    let c = build_cluster(&p, "Account", "withdraw", ClusterMode::Emote).unwrap();
    let broken = TestCase::new(vec![
        TestStatement::Construct {
            ctor: ctor(&p, "Account"),
            args: vec![],
        },
        TestStatement::Invoke {
            receiver: VarRef(0),
            method: c.target,
            args: vec![Arg::Var(VarRef::DANGLING)],
        },
    ]);
    assert!(!broken.is_valid(&p));
    for seed in 0..20 {
        let fixed = type_repair(&p, &c, &broken, &mut rng(seed)).unwrap();
        fixed.validate(&p).unwrap();
        assert_eq!(fixed.len(), 2);
        assert!(matches!(
            fixed.statements[1],
            TestStatement::Invoke { args: ref a, .. } if matches!(a[0], Arg::Lit(Literal::Int(_)))
        ));
    }
}

#[test]
fn repair_prefers_an_existing_int_variable() {
    let p = corpus("account.moo");
    let c = build_cluster(&p, "Account", "withdraw", ClusterMode::Emote).unwrap();
    let broken = TestCase::new(vec![
        TestStatement::Construct {
            ctor: ctor(&p, "Account"),
            args: vec![],
        },
        TestStatement::Literal {
            value: Literal::Int(4),
        },
        TestStatement::Invoke {
            receiver: VarRef(0),
            method: c.target,
            args: vec![Arg::Var(VarRef(7))],
        },
    ]);
    let fixed = type_repair(&p, &c, &broken, &mut rng(0)).unwrap();
    assert!(matches!(
        fixed.statements[2],
        TestStatement::Invoke { args: ref a, .. } if a[0] == Arg::Var(VarRef(1))
    ));
}

#[test]
fn repair_of_a_valid_test_is_identity() {
    let p = corpus("account.moo");
    let c = build_cluster(&p, "Account", "withdraw", ClusterMode::Strict).unwrap();
    let t = TestCase::new(vec![
        TestStatement::Construct {
            ctor: ctor(&p, "Account"),
            args: vec![],
        },
        TestStatement::Invoke {
            receiver: VarRef(0),
            method: c.target,
            args: vec![Arg::Lit(Literal::Int(3))],
        },
    ]);
    assert_eq!(type_repair(&p, &c, &t, &mut rng(5)).unwrap(), t);
}

#[test]
fn repair_without_a_generator_is_saturated() {
    let src = "class B { public int v; B() { } }
        class A { A() { } public int f(B b) { if (b == null) { return 0; } return 1; } }";
    let p = compile(src).unwrap();
    let c = build_cluster(&p, "A", "f", ClusterMode::Strict).unwrap();
    let broken = TestCase::new(vec![
        TestStatement::Construct {
            ctor: ctor(&p, "A"),
            args: vec![],
        },
        TestStatement::Invoke {
            receiver: VarRef(0),
            method: c.target,
            args: vec![Arg::Var(VarRef(2))],
        },
    ]);
    assert_eq!(
        type_repair(&p, &c, &broken, &mut rng(0)),
        Err(Saturated("no generator for B".into()))
    );
    // The EMOTE cluster reaches B through f's parameter and can repair.
    let e = build_cluster(&p, "A", "f", ClusterMode::Emote).unwrap();
    let fixed = type_repair(&p, &e, &broken, &mut rng(0)).unwrap();
    fixed.validate(&p).unwrap();
}

#[test]
fn tests_render_as_pseudocode() {
    let p = corpus("consistency.moo");
    let t = TestCase::new(vec![
        TestStatement::Construct {
            ctor: ctor(&p, "Consistency"),
            args: vec![],
        },
        TestStatement::Invoke {
            receiver: VarRef(0),
            method: method(&p, "Consistency", "setType"),
            args: vec![Arg::Lit(Literal::Str("file".into()))],
        },
        TestStatement::Invoke {
            receiver: VarRef(0),
            method: method(&p, "Consistency", "checkConsistency"),
            args: vec![],
        },
    ]);
    assert_eq!(
        t.render(&p),
        "Consistency v0 = new Consistency();\nv0.setType(\"file\");\nbool v2 = v0.checkConsistency();\n"
    );
}

#[test]
fn insert_and_remove_keep_references_consistent() {
    let p = corpus("account.moo");
    let new = TestStatement::Construct {
        ctor: ctor(&p, "Account"),
        args: vec![],
    };
    let call = |v| TestStatement::Invoke {
        receiver: VarRef(v),
        method: method(&p, "Account", "deposit"),
        args: vec![Arg::Lit(Literal::Int(1))],
    };
    let mut t = TestCase::new(vec![new.clone(), call(0)]);
    t.insert(0, new.clone());
    assert_eq!(t.statements[2], call(1));
    t.remove(1);
    assert_eq!(t.statements[1], call(usize::MAX));
    assert!(!t.is_valid(&p));
}

// --- properties -----------------------------------------------------------

fn modes() -> impl Strategy<Value = ClusterMode> {
    prop_oneof![
        Just(ClusterMode::Strict),
        Just(ClusterMode::Emote),
        Just(ClusterMode::Whole)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn insertion_and_repair_stay_type_valid(
        target in 0usize..27,
        mode in modes(),
        seed in any::<u64>(),
        steps in 1usize..25,
        cut in any::<prop::sample::Index>(),
    ) {
        let targets = all_targets();
        let (p, class, name) = &targets[target % targets.len()];
        let c = build_cluster(p, class, name, mode).unwrap();
        let mut r = rng(seed);
        let mut t = TestCase::default();
        for _ in 0..steps {
            t = random_statement_insertion(p, &c, &t, &mut r).unwrap();
            prop_assert!(t.is_valid(p), "{}", t.render(p));
            if mode == ClusterMode::Strict {
                prop_assert!(strict_whitelisted(p, &c, &t));
            }
        }
        if mode.requires_suffix() {
            let s = enforce_target_suffix(p, &c, &t, &mut r).unwrap();
            prop_assert!(s.is_valid(p));
            prop_assert_eq!(s.statements.last().and_then(|x| x.callee()), Some(c.target));
        }
        // Knock out one statement and repair the orphaned references.
        let mut broken = t.clone();
        broken.remove(cut.index(t.len()));
        let fixed = type_repair(p, &c, &broken, &mut r).unwrap();
        prop_assert!(fixed.is_valid(p), "{}", fixed.render(p));
        if mode == ClusterMode::Strict {
            prop_assert!(strict_whitelisted(p, &c, &fixed));
        }
    }
}
