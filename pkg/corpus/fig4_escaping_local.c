// expect: race
// Two threads increment a local of main through pointers.
void *t1(void *arg1) {
  int *x = (int *)arg1;
  (*x)++;
  return NULL;
}
void *t2(void *arg2) {
  int *y = (int *)arg2;
  (*y)++;
  return NULL;
}
int main() {
  int data = 0;
  create(t1, &data);
  create(t2, &data);
  return 0;
}
