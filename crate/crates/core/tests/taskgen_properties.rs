use std::collections::HashMap;

use codesim::dsl::{
    backward_slice, critical_path_length, execute_final, restrict, Node, Program, VarId, DEFAULT_STEP_LIMIT,
};
use codesim::taskgen::{
    approximate_instance, batch_file_name, derive_seed, equivalent_variants, generate_batch, generate_pair, Answer,
    GenParams, InstanceBatch, OpClass, Plan, Rendering, TaskFamily, BATCH_SCHEMA_VERSION,
};

const PER_FAMILY: usize = 1000;

/// Line-by-line evaluator over the rendered text of a loop-free program.
fn eval_text(src: &str) -> HashMap<String, i64> {
    let mut env: HashMap<String, i64> = HashMap::new();
    for line in src.lines() {
        let line: String = line.chars().filter(|c| !c.is_whitespace()).collect();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let read = |env: &HashMap<String, i64>, s: &str| -> i64 {
            s.parse().unwrap_or_else(|_| *env.get(s).unwrap_or_else(|| panic!("read of unset {s}")))
        };
        if let Some((dst, rhs)) = line.split_once("+=") {
            let v = env[dst] + read(&env, rhs);
            env.insert(dst.into(), v);
        } else if let Some((dst, rhs)) = line.split_once("-=") {
            let v = env[dst] - read(&env, rhs);
            env.insert(dst.into(), v);
        } else if let Some((dst, rhs)) = line.split_once("&=") {
            let v = ((env[dst] != 0) && (read(&env, rhs) != 0)) as i64;
            env.insert(dst.into(), v);
        } else if let Some((dst, rhs)) = line.split_once("|=") {
            let v = ((env[dst] != 0) || (read(&env, rhs) != 0)) as i64;
            env.insert(dst.into(), v);
        } else {
            let parts: Vec<&str> = line.split('=').collect();
            let (value, dsts) = parts.split_last().unwrap();
            let v = read(&env, value);
            for d in dsts {
                env.insert(d.to_string(), v);
            }
        }
    }
    env
}

fn params(family: TaskFamily) -> GenParams {
    let mut p = GenParams::new(family);
    match family {
        TaskFamily::CriticalPath => {
            p.n_ops = 30;
            p.n_vars = 6;
            p.path_len = 15;
        }
        TaskFamily::ParallelPaths => {
            p.n_ops = 30;
            p.n_vars = 6;
        }
        TaskFamily::NestedLoops => p.depth = 5,
        TaskFamily::Sorting => p.vector_len = 20,
        TaskFamily::ApproximateLoops => p.n_paths = 4,
        TaskFamily::FaultTolerant => {
            p.n_ops = 15;
            p.n_variants = 3;
        }
        TaskFamily::StraightLine => p.n_ops = 30,
    }
    p
}

#[test]
fn paired_ground_truth_agrees() {
    for family in TaskFamily::ALL {
        let batch = generate_batch(&params(family), PER_FAMILY, 2024).unwrap();
        for inst in &batch {
            assert_eq!(inst.recompute_synthetic().as_ref(), Some(&inst.ground_truth), "{}", inst.id);
            match (&inst.plan, family) {
                (Some(Plan::Ranking(r)), _) => {
                    let entry = inst.algorithm.as_ref().unwrap().entry().unwrap();
                    let via_sort = r.evaluate_with(entry).map(Answer::Name);
                    assert_eq!(via_sort.as_ref(), inst.naturalistic_truth.as_ref(), "{}", inst.id);
                    assert_eq!(inst.truth(Rendering::Naturalistic), via_sort.as_ref());
                }
                (Some(plan), _) => {
                    assert_eq!(plan.evaluate(), inst.ground_truth, "{}", inst.id);
                    assert_eq!(inst.truth(Rendering::Naturalistic), Some(&inst.ground_truth));
                }
                (None, TaskFamily::StraightLine | TaskFamily::ApproximateLoops | TaskFamily::FaultTolerant) => {
                    assert!(!inst.has(Rendering::Naturalistic));
                }
                (None, _) => panic!("{} has no naturalistic twin", inst.id),
            }
        }
    }
}

#[test]
fn straight_line_seed_42_matches_text_evaluation() {
    let mut p = GenParams::new(TaskFamily::StraightLine).with_seed(42);
    p.n_ops = 10;
    p.n_vars = 3;
    p.op_subset = vec![OpClass::AddSub, OpClass::Mov];
    let inst = generate_pair(&p).unwrap();
    let program = inst.program.as_ref().unwrap();
    assert_eq!(program.op_count(), 10);
    assert_eq!(program.n_vars, 3);
    let env = eval_text(&inst.synthetic_source);
    let target = inst.targets[0].to_string();
    assert_eq!(inst.ground_truth, Answer::Int(env[&target]));
}

#[test]
fn straight_line_text_evaluation_over_many_seeds() {
    for ops in [vec![OpClass::AddSub], vec![OpClass::Mov], vec![OpClass::Logic], vec![OpClass::Logic, OpClass::Mov]] {
        let mut p = GenParams::new(TaskFamily::StraightLine);
        p.op_subset = ops.clone();
        p.n_ops = 20;
        for inst in generate_batch(&p, 200, 5).unwrap() {
            let program = inst.program.as_ref().unwrap();
            assert_eq!(program.op_count(), 20);
            let env = eval_text(&inst.synthetic_source);
            assert_eq!(inst.ground_truth, Answer::Int(env[&inst.targets[0].to_string()]), "{ops:?}");
            if ops.contains(&OpClass::Logic) {
                assert!(env.values().all(|v| *v == 0 || *v == 1));
            }
        }
    }
}

#[test]
fn generation_is_deterministic() {
    for family in TaskFamily::ALL {
        let p = params(family).with_seed(99);
        let a = serde_json::to_string(&generate_pair(&p).unwrap()).unwrap();
        let b = serde_json::to_string(&generate_pair(&p).unwrap()).unwrap();
        assert_eq!(a, b);
        let other = serde_json::to_string(&generate_pair(&p.clone().with_seed(100)).unwrap()).unwrap();
        assert_ne!(a, other);
    }
}

#[test]
fn critical_paths_are_exact_and_distractors_are_irrelevant() {
    for n_ops in [20, 30] {
        for path_len in [5, 10, 15, 20] {
            let mut p = GenParams::new(TaskFamily::CriticalPath);
            p.n_ops = n_ops;
            p.n_vars = 6;
            p.path_len = path_len;
            for inst in generate_batch(&p, 100, 8).unwrap() {
                let program = inst.program.as_ref().unwrap();
                let target = inst.targets[0];
                assert_eq!(program.op_count(), n_ops);
                assert_eq!(critical_path_length(program, target).unwrap(), path_len);
                let sliced = restrict(program, &backward_slice(program, target).unwrap());
                let env = execute_final(&sliced, DEFAULT_STEP_LIMIT).unwrap();
                assert_eq!(Answer::Int(env.get(target).unwrap()), inst.ground_truth);
            }
        }
    }
}

#[test]
fn nested_loops_stay_within_bounds() {
    for k in 1..=9 {
        let mut p = GenParams::new(TaskFamily::NestedLoops);
        p.depth = k;
        for inst in generate_batch(&p, 200, k as u64).unwrap() {
            let Answer::Int(v) = inst.ground_truth else { panic!() };
            assert!(v.abs() <= 1 << k && v.abs() <= 1024);
            assert_eq!(inst.program.as_ref().unwrap().nesting_depth(), k);
        }
    }
}

#[test]
fn sorting_vectors_repeat_elements() {
    for len in [20, 30, 40] {
        let mut p = GenParams::new(TaskFamily::Sorting);
        p.vector_len = len;
        let batch = generate_batch(&p, 50, 3).unwrap();
        let with_dups = batch
            .iter()
            .filter(|i| {
                let mut v = i.sort_input.clone().unwrap();
                v.sort_unstable();
                v.windows(2).any(|w| w[0] == w[1])
            })
            .count();
        assert!(with_dups > 0);
        for inst in batch {
            let input = inst.sort_input.unwrap();
            assert!(input.iter().all(|x| (0..=100).contains(x)));
            let mut sorted = input;
            sorted.sort_unstable();
            assert_eq!(inst.ground_truth, Answer::Sequence(sorted));
        }
    }
}

#[test]
fn sorting_seed_7_is_a_sorted_permutation() {
    let inst = generate_pair(&GenParams::new(TaskFamily::Sorting).with_seed(7)).unwrap();
    let Answer::Sequence(out) = &inst.ground_truth else { panic!() };
    assert_eq!(out.len(), 10);
    assert!(out.windows(2).all(|w| w[0] <= w[1]));
    let mut input = inst.sort_input.clone().unwrap();
    input.sort_unstable();
    assert_eq!(&input, out);
}

/// Runs loop `i` of an approximate-loops program alone, with its init.
fn isolated(program: &Program, i: usize) -> i64 {
    let init = program.body[i].clone();
    let lp = program.body.iter().filter(|n| matches!(n, Node::Loop(_))).nth(i).unwrap().clone();
    let alone = Program::new(program.n_vars, vec![init, lp]);
    execute_final(&alone, DEFAULT_STEP_LIMIT).unwrap().get(VarId(i as u32)).unwrap()
}

#[test]
fn approximate_components_are_independent() {
    for k in [1, 3, 9] {
        for seed in 0..20 {
            let inst = approximate_instance(k, 3, seed).unwrap();
            let program = inst.program.as_ref().unwrap();
            assert_eq!(program.body.iter().filter(|n| matches!(n, Node::Loop(_))).count(), k);
            let expected: Vec<i64> = (0..k).map(|i| isolated(program, i)).collect();
            assert_eq!(inst.ground_truth, Answer::Tuple(expected));
        }
    }
    assert!(approximate_instance(0, 3, 0).is_err());
    assert!(approximate_instance(10, 3, 0).is_err());
}

#[test]
fn four_variants_of_a_twenty_statement_program() {
    for seed in 0..50 {
        let mut p = GenParams::new(TaskFamily::StraightLine).with_seed(seed);
        p.n_ops = 17;
        let inst = generate_pair(&p).unwrap();
        let program = inst.program.unwrap();
        assert_eq!(program.statements().len(), 20);
        let vs = equivalent_variants(&program, 4, &inst.targets, seed).unwrap();
        assert_eq!(vs.len(), 4);
        let texts: std::collections::BTreeSet<String> = vs.iter().map(codesim::dsl::render_source).collect();
        assert_eq!(texts.len(), 4);
        for v in &vs {
            let env = execute_final(v, DEFAULT_STEP_LIMIT).unwrap();
            assert_eq!(Answer::Int(env.get(inst.targets[0]).unwrap()), inst.ground_truth);
        }
    }
}

#[test]
fn fault_tolerant_sources_agree() {
    let mut p = GenParams::new(TaskFamily::FaultTolerant);
    p.n_variants = 5;
    for inst in generate_batch(&p, 100, 1).unwrap() {
        assert_eq!(inst.variants.len(), 5);
        let target = inst.targets[0].to_string();
        for chunk in inst.synthetic_source.split("# Program ").skip(1) {
            assert_eq!(Answer::Int(eval_text(chunk.split_once('\n').unwrap().1)[&target]), inst.ground_truth);
        }
    }
}

#[test]
fn infeasible_parameters_are_rejected() {
    let mut p = GenParams::new(TaskFamily::CriticalPath);
    p.path_len = 20;
    p.n_ops = 10;
    assert!(generate_pair(&p).is_err());
    let mut p = GenParams::new(TaskFamily::NestedLoops);
    p.depth = 10;
    assert!(generate_pair(&p).is_err());
    let mut p = GenParams::new(TaskFamily::StraightLine);
    p.op_subset = vec![OpClass::AddSub, OpClass::Logic];
    assert!(generate_pair(&p).is_err());
}

#[test]
fn batches_serialise_and_read_back() {
    let p = params(TaskFamily::CriticalPath);
    let batch = InstanceBatch {
        schema_version: BATCH_SCHEMA_VERSION,
        family: p.family,
        params: p.clone(),
        batch: 1,
        instances: generate_batch(&p, 5, derive_seed(1, &[2])).unwrap(),
    };
    let text = serde_json::to_string_pretty(&batch).unwrap();
    let back: InstanceBatch = serde_json::from_str(&text).unwrap();
    assert_eq!(back, batch);
    assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    assert_eq!(
        batch_file_name(&p, 5, 1),
        "n_ops-30_n_vars-6_len_critical_path-15_n_instances-5_batch-1.json"
    );
}
