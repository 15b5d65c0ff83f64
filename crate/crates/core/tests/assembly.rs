use h2nc::assembly::{
    assemble, build_dof_map, check_hypotheses, first_normal_local, ElementCache,
};
use h2nc::element::ElementFamily;
use h2nc::mesh::{extract_entities, uniform_cube_mesh};
use h2nc::solve::{solve, SolverKind};

fn dense_cholesky_ok(a: &[Vec<f64>]) -> bool {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

#[test]
fn level_one_p3_counts() {
    let mesh = uniform_cube_mesh(1).unwrap();
    let ents = extract_entities(&mesh).unwrap();
    let map = build_dof_map(&mesh, &ents, ElementFamily::GeneralEnriched(3));
    // 19 edges * 2 + 18 faces * 1 + 18 faces * 3
    assert_eq!(map.ndofs, 110);
    assert_eq!(map.nfree(), 26);
}

#[test]
fn system_is_symmetric_positive_definite() {
    let mesh = uniform_cube_mesh(2).unwrap();
    let ents = extract_entities(&mesh).unwrap();
    for fam in [ElementFamily::GeneralEnriched(3), ElementFamily::P4E6] {
        let map = build_dof_map(&mesh, &ents, fam);
        let cache = ElementCache::build(&mesh, &map).unwrap();
        let sys = assemble(&mesh, &map, &cache, &|_| 1.0).unwrap();
        assert!(sys.asymmetry() < 1e-12, "{fam}");
        assert!(dense_cholesky_ok(&sys.to_dense()), "{fam}");
    }
}

#[test]
fn translated_tets_share_classes() {
    let mesh = uniform_cube_mesh(3).unwrap();
    let ents = extract_entities(&mesh).unwrap();
    let map = build_dof_map(&mesh, &ents, ElementFamily::GeneralEnriched(3));
    let cache = ElementCache::build(&mesh, &map).unwrap();
    assert!(cache.classes.len() < mesh.tets.len() / 4);
}

#[test]
fn weak_continuity_holds_and_detects_faults() {
    let mesh = uniform_cube_mesh(2).unwrap();
    let ents = extract_entities(&mesh).unwrap();
    for fam in [
        ElementFamily::GeneralEnriched(3),
        ElementFamily::GeneralEnriched(4),
        ElementFamily::P4E6,
        ElementFamily::P5E7,
    ] {
        let mut map = build_dof_map(&mesh, &ents, fam);
        let cache = ElementCache::build(&mesh, &map).unwrap();
        let rep = check_hypotheses(&mesh, &ents, &map, &cache, 2, 1).unwrap();
        assert!(rep.max() < 1e-10, "{fam}: {rep:?}");

        // flip the orientation of one interior normal DOF in one tet
        let (t, m) = (0..mesh.tets.len())
            .flat_map(|t| (0..4).map(move |m| (t, m)))
            .find(|&(t, m)| !ents.boundary_faces[ents.tet_faces[t][m]])
            .unwrap();
        let i = first_normal_local(&map, m);
        map.tet_signs[t][i] = -map.tet_signs[t][i];
        let bad = check_hypotheses(&mesh, &ents, &map, &cache, 2, 1).unwrap();
        assert!(bad.interior_gradient > 1e-3, "{fam}: {bad:?}");
    }
}

#[test]
fn assembly_and_solve_are_deterministic() {
    let mesh = uniform_cube_mesh(2).unwrap();
    let ents = extract_entities(&mesh).unwrap();
    let map = build_dof_map(&mesh, &ents, ElementFamily::P4E6);
    let run = || {
        let cache = ElementCache::build(&mesh, &map).unwrap();
        let sys = assemble(&mesh, &map, &cache, &|x| x[0].sin() + x[1] * x[2]).unwrap();
        let (u, _) = solve(&sys, SolverKind::Direct).unwrap();
        (sys, u)
    };
    let (s1, u1) = run();
    let (s2, u2) = run();
    assert_eq!(s1, s2);
    assert_eq!(
        u1.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        u2.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn direct_and_cg_agree_on_fe_system() {
    let mesh = uniform_cube_mesh(2).unwrap();
    let ents = extract_entities(&mesh).unwrap();
    let map = build_dof_map(&mesh, &ents, ElementFamily::GeneralEnriched(3));
    let cache = ElementCache::build(&mesh, &map).unwrap();
    let sys = assemble(&mesh, &map, &cache, &|_| 1.0).unwrap();
    let (a, sa) = solve(&sys, SolverKind::Direct).unwrap();
    let (b, sb) = solve(&sys, SolverKind::Cg).unwrap();
    assert!(sa.residual < 1e-11);
    assert!(sb.residual < 1e-11);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(diff < 1e-8 * scale, "{diff} vs {scale}");
}
