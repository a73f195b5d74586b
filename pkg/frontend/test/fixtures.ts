/** Small hand-written results files mirroring what the solver CLI emits. */

export const BENCH_CSV = `experiment,n,p,constraint,iters,objective,forward_error,feasibility_violation,wall_ms,seed
recover,8,1,rank,120,1.2e-09,3.1e-10,0.0,4.5,0
recover,8,1,rank,130,1.5e-09,4.0e-10,0.0,4.9,0
recover,16,1,rank,200,2.2e-09,8.1e-10,0.0,21.0,0
recover,16,1,rank,210,2.0e-09,7.5e-10,0.0,19.5,0
recover,8,inf,rank,300,3.0e-09,9.0e-10,0.0,6.1,0
recover,16,inf,rank,450,4.0e-09,1.1e-09,0.0,30.2,0
`;

export const TINY_ERROR_CSV = `experiment,n,p,constraint,iters,objective,forward_error,feasibility_violation,wall_ms,seed
recover,8,2,unconstrained,10,0.0,1e-15,0.0,1.0,0
recover,16,2,unconstrained,12,0.0,5e-13,0.0,2.0,0
`;

export const BLANK_ERROR_CSV = `experiment,n,p,constraint,iters,objective,forward_error,feasibility_violation,wall_ms,seed
cfar,10,inf,psd,800,2.46,,0.0,55.0,0
cfar,10,inf,psd,820,2.44,,0.0,57.0,0
`;

export const ZERO_VIOLATION_CSV = `experiment,n,p,constraint,iters,objective,forward_error,feasibility_violation,wall_ms,seed
sysid,10,1,intersection,500,25.6,,0.0,40.0,0
sysid,20,1,intersection,900,51.0,,0.0,160.0,0
`;

export const MISSING_COLUMNS_CSV = `experiment,n,p,iters,objective,wall_ms,seed
recover,8,1,120,1.2e-09,4.5,0
`;

export const NON_NUMERIC_CSV = `experiment,n,p,constraint,iters,objective,forward_error,feasibility_violation,wall_ms,seed
recover,eight,1,rank,120,1.2e-09,3.1e-10,0.0,4.5,0
`;

export const HEADER_ONLY_CSV = `experiment,n,p,constraint,iters,objective,forward_error,feasibility_violation,wall_ms,seed
`;
