import java.util.*;

public class Task {
    // simple version
    static void run(int[] xs) {
        int right = xs.length;
        int k = 0;
        while (k < right - 1) {
            boolean swapped = false;
            for (int v = 0; v < right - k - 1; v += 1) {
                if (xs[v] < xs[v + 1]) {
                    int t = xs[v + 1];
                    xs[v + 1] = xs[v];
                    xs[v] = t;
                    swapped = true;
                }
            }
            if (!swapped) break;
            k = k + 1;
        }
    }

    public static void main(String[] args) {
        int[] a = {21, -23, 73, 1, 73, 83};
        run(a);
        System.out.printf("%s%n", Arrays.toString(a));
    }
}
