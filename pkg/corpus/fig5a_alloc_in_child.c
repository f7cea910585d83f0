// expect: race
// allow: unknown
// The allocation happens in t1, the racy increments in two t2 instances.
int *g;
void *t1(void *a) {
  g = malloc(sizeof(int));
  return NULL;
}
void *t2(void *a) {
  (*g)++;
  return NULL;
}
int main() {
  create(t1);
  join(t1);
  create(t2);
  create(t2);
  return 0;
}
